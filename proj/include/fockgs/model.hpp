// model.hpp: generalized spin-boson and reduced Pauli-Fierz Hamiltonians on
// (atom or electron) ⊗ Fock space.
//
// Product-space index convention: atom index major, Fock index minor, i.e.
// |a⟩⊗|n⟩ ↦ a·dim(Fock) + index(n). For the Pauli-Fierz toy the "atom" factor
// is site ⊗ spin with index 2·site + spin.

#pragma once

#include "fockgs/fock.hpp"
#include "fockgs/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fockgs::model {

using fock::ModeGrid;

enum class Quadrature { uniform_midpoint, log_midpoint };

struct Dispersion {
    double mass = 0.0;  // ν; 0 means massless ω = |k|
    static Dispersion massless() { return {0.0}; }
    static Dispersion massive(double nu) { return {nu}; }
};

// Mode grid on [k_min, k_max]: midpoints of M cells, uniform in k or in
// log k, with ω_m = √(k_m² + ν²) and w_m the cell widths. Uniform cells allow
// k_min = 0 (midpoints stay positive); logarithmic cells need k_min > 0.
ModeGrid dispersion_grid(Dispersion kind, double k_min, double k_max, int modes,
                         Quadrature quadrature = Quadrature::uniform_midpoint);

// λ_m = ω_m^β · window(k_m) · √w_m. The quadrature weight is folded in so
// that continuum integrals over k become plain sums over modes.
Vector form_factor_preset(const ModeGrid& grid, double beta,
                          const std::function<double(double)>& window = [](double) { return 1.0; });

struct CouplingTerm {
    Matrix b;       // n×n Hermitian
    Vector lambda;  // length M
};

struct GsbSpec {
    Matrix a;  // atom Hamiltonian, n×n Hermitian
    std::vector<CouplingTerm> couplings;
    double alpha = 0.0;
    ModeGrid grid;
    int cutoff = 4;  // N_max
    std::size_t dimension_cap = fock::kDefaultDimensionCap;

    void validate() const;
};

GsbSpec spin_boson_preset(double epsilon, double delta, const ModeGrid& grid, double beta, double alpha, int cutoff);

struct PfToySpec {
    int sites = 16;       // N_x
    double length = 8.0;  // L, periodic box [-L/2, L/2)
    double electron_mass = 1.0;
    double charge = 0.0;             // e, the coupling constant
    std::vector<double> potential;   // V(x_i), length N_x
    ModeGrid grid;
    std::vector<double> uv_cutoff;   // φ̂(k_m), length M
    int cutoff = 2;
    std::size_t dimension_cap = fock::kDefaultDimensionCap;

    double spacing() const { return length / sites; }
    double position(int site) const { return (site - sites / 2) * spacing(); }
    void validate() const;
};

// Symmetric square well of the given depth (V = -depth for |x| < half_width).
std::vector<double> square_well(const PfToySpec& spec, double depth, double half_width);

struct AssembledModel {
    enum class Kind { gsb, pf_toy };
    Kind kind = Kind::gsb;
    std::string source;  // short description of the spec that produced it

    fock::BasisPtr basis;
    ModeGrid grid;
    int atom_dim = 0;          // dimension of the non-Fock factor
    Matrix atom_hamiltonian;   // A, or h_p ⊗ 1_2 for the PF toy
    Matrix atom_ground_projector;
    double atom_energy = 0.0;  // E(A)
    int atom_multiplicity = 0;
    RealVector atom_levels;  // eigenvalues of atom_hamiltonian, ascending
    Matrix atom_modes;       // matching eigenvectors
    RealVector field_energies;  // dΓ(ω) diagonal over the Fock basis
    double atom_gap = 0.0;     // +inf when A has a single distinct eigenvalue

    SparseMatrix h0;
    SparseMatrix hi;
    SparseMatrix h;
    double g = 0.0;

    // Lifted per-mode annihilators 1 ⊗ a_m, number operator and dΓ(ω).
    std::vector<SparseMatrix> lower;
    SparseMatrix number;
    SparseMatrix free_field;
    // T_m = [a_m, H_I] (lifted a_m); symbolic for GSB, truncated numerical
    // commutator restricted to exact columns for the PF toy.
    std::vector<SparseMatrix> t;
    // Largest change of total boson number produced by H_I.
    int interaction_reach = 1;

    // PF toy only.
    struct PfOperators {
        Matrix electron_hamiltonian;  // h_p on the site grid
        SparseMatrix position;        // x ⊗ 1_2 ⊗ 1
        SparseMatrix momentum;        // p ⊗ 1_2 ⊗ 1
        SparseMatrix link_field;      // Ā: bond-averaged A on nearest-neighbour links
        RealVector interior;          // 0/1 mask, zero on the two seam sites
    };
    std::optional<PfToySpec> pf;
    std::optional<PfOperators> pf_ops;

    Eigen::Index dim() const { return h.rows(); }
    Eigen::Index fock_dim() const { return static_cast<Eigen::Index>(basis->dim()); }
    int modes() const { return basis->modes(); }
    int cutoff() const { return basis->cutoff(); }

    // 0/1 mask over the product space selecting Fock sectors >= min_total.
    RealVector sector_mask(int min_total) const;
    // P_Ω lifted: 1 ⊗ |Ω⟩⟨Ω|, as a 0/1 diagonal.
    RealVector vacuum_mask() const;
    // Applies f(H̄₀) to a vector using the product structure of H₀, where
    // H̄₀ = H₀ - E(H₀).
    Vector apply_h0_function(const std::function<double(double)>& f, const Vector& v) const;
    double h0_ground_energy() const { return atom_energy; }
};

AssembledModel assemble_gsb(const GsbSpec& spec);
AssembledModel assemble_pf_toy(const PfToySpec& spec);

// Electron-only Hamiltonian h_p = -Δ_h/(2m) + V on the periodic grid.
Matrix electron_hamiltonian(const PfToySpec& spec);
// Central-difference momentum p = -i(ψ_{i+1} - ψ_{i-1})/(2h), periodic.
Matrix central_momentum(const PfToySpec& spec);

// Lifts an atom operator (atom_dim × atom_dim) to the product space.
SparseMatrix lift_atom(const Matrix& op, Eigen::Index fock_dim);
// Lifts a Fock operator to the product space.
SparseMatrix lift_fock(const SparseMatrix& op, int atom_dim);

// ‖H_I (H̄₀ + 1)^{-1}‖, the relative bound used for a and b.
double relative_bound(const AssembledModel& model, int dense_threshold = 2000);

}  // namespace fockgs::model
