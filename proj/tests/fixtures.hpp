// fixtures.hpp: small model instances shared by the unit tests and the
// acceptance binary.

#pragma once

#include "fockgs/model.hpp"

#include <cmath>

namespace fixture {

using namespace fockgs;
using namespace fockgs::model;

inline Matrix pauli_z() {
    Matrix s(2, 2);
    s << 1.0, 0.0, 0.0, -1.0;
    return s;
}

// Single mode at frequency ω with H = (ε/2)σ_z + ω a†a + α σ_z φ(λ).
inline GsbSpec displaced_oscillator(double epsilon, double omega, double lambda, double alpha, int cutoff) {
    ModeGrid g;
    g.k = RealVector::Constant(1, omega);
    g.weights = RealVector::Ones(1);
    g.omega = RealVector::Constant(1, omega);
    g.k_min = 0.5 * omega;
    g.k_max = 1.5 * omega;
    GsbSpec s;
    s.a = 0.5 * epsilon * pauli_z();
    s.couplings.push_back({pauli_z(), Vector::Constant(1, lambda)});
    s.alpha = alpha;
    s.grid = g;
    s.cutoff = cutoff;
    return s;
}

inline GsbSpec spin_boson(double alpha, int modes = 3, int cutoff = 4, double epsilon = 1.0, double delta = 0.5,
                          double beta = 0.5, double nu = 0.0) {
    const Dispersion d = nu > 0.0 ? Dispersion::massive(nu) : Dispersion::massless();
    return spin_boson_preset(epsilon, delta, dispersion_grid(d, 0.2, 2.0, modes), beta, alpha, cutoff);
}

// Spin-boson with a two-fold degenerate atom A = 0₂.
inline GsbSpec degenerate_atom(double alpha, int modes = 3, int cutoff = 4) {
    GsbSpec s = spin_boson(alpha, modes, cutoff);
    s.a = Matrix::Zero(2, 2);
    return s;
}

inline PfToySpec pf_toy(double charge, int modes = 3, int cutoff = 2, int sites = 16, double depth = 2.0) {
    PfToySpec s;
    s.sites = sites;
    s.length = 8.0;
    s.charge = charge;
    s.grid = dispersion_grid(Dispersion::massless(), 0.2, 3.0, modes);
    s.uv_cutoff.assign(static_cast<std::size_t>(modes), 1.0);
    s.cutoff = cutoff;
    s.potential = square_well(s, depth, 1.0);
    return s;
}

}  // namespace fixture
