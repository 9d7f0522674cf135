// oracles.hpp: independent reference computations for the test suites.
//
// Nothing here calls into the library's basis ranking, operator assembly or
// solvers: occupation vectors are enumerated by brute force, operators are
// built densely from explicit bra-ket rules, and closed forms are written out
// directly.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Occupation = std::vector<int>;

// Every vector in {0..cutoff}^modes with total <= cutoff (odometer scan).
inline std::vector<Occupation> enumerate_occupations(int modes, int cutoff) {
    std::vector<Occupation> out;
    Occupation v(static_cast<std::size_t>(modes), 0);
    while (true) {
        int total = 0;
        for (int x : v) total += x;
        if (total <= cutoff) out.push_back(v);
        int pos = modes - 1;
        while (pos >= 0 && v[static_cast<std::size_t>(pos)] == cutoff) {
            v[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++v[static_cast<std::size_t>(pos)];
    }
    return out;
}

// All values Σ n_m s_m over the truncated occupations, with repetition,
// sorted ascending.
inline std::vector<double> occupation_sums(const std::vector<double>& s, int cutoff) {
    std::vector<double> vals;
    for (const auto& v : enumerate_occupations(static_cast<int>(s.size()), cutoff)) {
        double e = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) e += v[i] * s[i];
        vals.push_back(e);
    }
    std::sort(vals.begin(), vals.end());
    return vals;
}

// Dense single-mode ladder matrices on {|0⟩, ..., |n_max⟩}.
inline Eigen::MatrixXcd single_mode_lower(int n_max) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Closed forms for the commuting spin-boson instance
// H = (ε/2)σ_z + ω a^†a + α σ_z (λ/√2)(a + a^†), λ real, ε > 0.
// The ground state has σ_z = -1 and is the coherent state with
// a φ = -s α λ/(√2 ω) φ for s = -1.
struct DisplacedOscillator {
    double epsilon;
    double omega;
    double lambda;
    double alpha;

    double ground_spin() const { return epsilon > 0 ? -1.0 : 1.0; }
    double energy() const { return -std::abs(epsilon) / 2.0 - alpha * alpha * lambda * lambda / (2.0 * omega); }
    double amplitude() const { return -ground_spin() * alpha * lambda / (std::sqrt(2.0) * omega); }
    double mean_number() const { return alpha * alpha * lambda * lambda / (2.0 * omega * omega); }
    double vacuum_overlap() const { return std::exp(-amplitude() * amplitude()); }
};

// Second moment of the uniform density on the grid x_i = (i - n/2) h.
inline double uniform_rms(int n, double length) {
    const double h = length / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = (i - n / 2) * h;
        s += x * x;
    }
    return std::sqrt(s / n);
}

// High-resolution midpoint quadrature of f over [a, b].
template <class F>
double midpoint_integral(F f, double a, double b, int cells = 200000) {
    const double w = (b - a) / cells;
    double s = 0.0;
    for (int i = 0; i < cells; ++i) s += f(a + (i + 0.5) * w);
    return s * w;
}

// Dense single-mode reduced Pauli-Fierz Hamiltonian on sites ⊗ spin ⊗ Fock,
// index (2·site + spin)·(n_max+1) + n, written out entry by entry:
//   kinetic  -Δ_h/(2m), periodic three-point Laplacian
//   cross    -(1/2m)(i/h) Σ_links A_ℓ (|i+1⟩⟨i| - |i⟩⟨i+1|)
//   spin     -(1/2m) σ_z (B_{i-1/2} + B_{i+1/2})/2 on site i
//   dia      +(e/2m) (A_{i-1/2}² + A_{i+1/2}²)/2 on site i
// with fields evaluated at link midpoints and c = φ̂ √(w/(2ω)):
//   A(x) = c (e^{-ikx} a† + e^{ikx} a),  B(x) = c k (-i e^{-ikx} a† + i e^{ikx} a).
struct PfSingleMode {
    int sites;
    double length;
    double mass;
    double charge;
    std::vector<double> potential;
    double k, weight, omega, form;
    int n_max;

    Eigen::MatrixXcd hamiltonian() const {
        using M = Eigen::MatrixXcd;
        const int nf = n_max + 1;
        const int dim = 2 * sites * nf;
        const double h = length / sites;
        const cplx i1(0.0, 1.0);
        const M a = single_mode_lower(n_max).cast<cplx>();
        const M ad = a.adjoint();
        const double c = form * std::sqrt(weight / (2.0 * omega));
        auto pos = [&](int s) { return (s - sites / 2) * h; };
        auto field_a = [&](double x) -> M { return c * (std::exp(-i1 * k * x) * ad + std::exp(i1 * k * x) * a); };
        auto field_b = [&](double x) -> M {
            return c * k * (-i1 * std::exp(-i1 * k * x) * ad + i1 * std::exp(i1 * k * x) * a);
        };
        auto idx = [&](int site, int spin, int n) { return (2 * site + spin) * nf + n; };

        M out = M::Zero(dim, dim);
        const double hop = 1.0 / (2.0 * mass * h * h);
        for (int s = 0; s < sites; ++s) {
            const int nxt = (s + 1) % sites;
            const int prv = (s + sites - 1) % sites;
            const M al = field_a(pos(s) + 0.5 * h);   // link s -> s+1
            const M ap = field_a(pos(prv) + 0.5 * h); // link s-1 -> s
            const M bl = field_b(pos(s) + 0.5 * h);
            const M bp = field_b(pos(prv) + 0.5 * h);
            for (int spin = 0; spin < 2; ++spin) {
                const double sz = spin == 0 ? 1.0 : -1.0;
                for (int n = 0; n < nf; ++n) {
                    out(idx(s, spin, n), idx(s, spin, n)) += 2.0 * hop + potential[static_cast<std::size_t>(s)] + n * omega;
                    out(idx(nxt, spin, n), idx(s, spin, n)) -= hop;
                    out(idx(s, spin, n), idx(nxt, spin, n)) -= hop;
                }
                for (int r = 0; r < nf; ++r)
                    for (int q = 0; q < nf; ++q) {
                        const cplx cross_fwd = -(1.0 / (2.0 * mass)) * (i1 / h) * al(r, q);
                        out(idx(nxt, spin, r), idx(s, spin, q)) += charge * cross_fwd;
                        out(idx(s, spin, r), idx(nxt, spin, q)) -= charge * cross_fwd;
                        const cplx spin_term = -(1.0 / (2.0 * mass)) * sz * 0.5 * (bl(r, q) + bp(r, q));
                        const M a2 = 0.5 * (al * al + ap * ap);
                        const cplx dia = (charge / (2.0 * mass)) * a2(r, q);
                        out(idx(s, spin, r), idx(s, spin, q)) += charge * (spin_term + dia);
                    }
            }
        }
        return out;
    }
};

}  // namespace oracle
