// verifier.hpp: ground-state identity and inequality checks with measured
// discrepancies, tolerances and truncation diagnostics.
//
// Every check runs on finite truncations and falls into one of four tiers:
// exact (machine precision), truncation (budgeted by the top-sector weight),
// inequality (a literal inequality with a small slack) and trend
// (monotonicity over a parameter family, 10% slack).

#pragma once

#include "fockgs/model.hpp"
#include "fockgs/spectral.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fockgs::verify {

using model::AssembledModel;
using spectral::GroundStateResult;
using spectral::SpectralConfig;

enum class Status { pass, fail, skipped, inconclusive };

struct Tolerances {
    double identity = 1e-10;        // relative, exact-tier identities
    double pull_through = 1e-8;     // defect-corrected residual
    double budget_factor = 10.0;    // |lhs - rhs| <= factor · top weight + floor
    double budget_floor = 1e-8;
    double margin = 1e-10;          // inequality slack
    double trend_slack = 0.10;      // monotone trends may rise by this fraction
    double final_ratio = 0.25;      // resolvent: n(last) <= ratio · n(first)
    double cauchy = 0.05;           // IR probe, relative change on the last refinement
    double growth = 0.5;            // IR probe, final increment / previous increment
    double top_weight_limit = 1e-3; // truncation reliability
    double binding = 1e-6;          // relative to max(1, |E(H)|)
    double commutator = 1e-8;
    double cluster_ratio = 1e3;     // gap-to-cluster-width ratio for exact spin clusters

    void validate() const;
};
const char* to_string(Status s);

// One row of a verification report: measured values and the tolerances they
// were held to, keyed by name.
struct CheckRecord {
    std::string check;
    Status status = Status::pass;
    std::map<std::string, double> values;
    std::string note;

    bool failed() const { return status == Status::fail; }
};
using VerificationReport = std::vector<CheckRecord>;

// Ground eigenspace of an assembled model, with the top-sector weight of each
// cluster vector filled in.
GroundStateResult solve_ground(const AssembledModel& model, const SpectralConfig& cfg);

// ---------------------------------------------------------------------------
// ⟨N⟩ = Σ_m ‖a_m φ‖² and, with the resolvent, = g² Σ_m ‖(H-E+ω_m)^{-1} T_m φ‖².

struct NumberReport {
    double lhs = 0.0;   // ⟨φ, (1⊗N) φ⟩
    double mid = 0.0;   // Σ_m ‖a_m φ‖²
    double rhs = 0.0;   // g² Σ_m ‖(H - E + ω_m)^{-1} T_m φ‖²  (NaN when not computed)
    double err_lhs_mid = 0.0;
    double err_lhs_rhs = 0.0;
    double top_weight = 0.0;
    double budget = 0.0;  // allowed |lhs - rhs|
    double tolerance = 1e-10;  // relative, for |lhs - mid|
    bool passed = true;

    CheckRecord record(const std::string& name) const;
};

NumberReport number_identity_check(const AssembledModel& model, const Vector& phi, const Tolerances& tol = {});
NumberReport number_formula_check(const AssembledModel& model, const GroundStateResult& gs,
                                  const SpectralConfig& cfg, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Pull-through: a_m φ = g (H - E + ω_m)^{-1} [H_I, a_m] φ up to the truncation
// defect D_m φ = ([H, a_m] + ω_m a_m + g T_m) φ.

struct PullThroughReport {
    std::vector<double> raw;        // r_m, worst over the cluster
    std::vector<double> defect;     // ‖D_m φ‖
    std::vector<double> corrected;  // residual after adding (H-E+ω_m)^{-1} D_m φ
    double max_raw = 0.0;
    double max_corrected = 0.0;
    // Largest ‖D_m φ‖ component outside the top `reach + 1` sectors; zero up to
    // rounding when the defect is a pure truncation effect.
    double defect_leak = 0.0;
    double tolerance = 1e-8;
    bool passed = true;

    CheckRecord record() const;
};

PullThroughReport pull_through_check(const AssembledModel& model, const GroundStateResult& gs,
                                     const SpectralConfig& cfg, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Σ_m ‖κ_m‖² is invariant under unitary changes of mode basis, where
// κ_m = (H - E + ω_m)^{-1} T_m φ.

struct HsReport {
    double sum = 0.0;
    double max_rel_deviation = 0.0;
    int trials = 0;
    double tolerance = 1e-10;
    bool passed = true;

    CheckRecord record() const;
};

// Columns κ_m for one ground vector.
Matrix carleman_kernel(const AssembledModel& model, const Vector& phi, double energy, const SpectralConfig& cfg);
// Σ_m ‖Σ_{m'} U_{m'm} κ_{m'}‖².
double carleman_sum(const Matrix& kernel, const Matrix& unitary);
// Haar-like random unitary from the QR factorization of a complex Gaussian.
Matrix random_unitary(int n, std::uint64_t seed);

HsReport hs_invariance_check(const AssembledModel& model, const GroundStateResult& gs, int trials,
                             std::uint64_t seed, const SpectralConfig& cfg, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Vacuum overlap and δ(g) bound.

struct OverlapPoint {
    double g = 0.0;
    double overlap = 0.0;  // min over the cluster of ⟨φ,(P_A⊗P_Ω)φ⟩/‖φ‖²
    double delta = 0.0;    // δ(g) = c(g)² + 2|g| c_int / (ε_gap - E(H_q))
    double c = 0.0;        // c(g)
    double c_int = 0.0;
    double a = 0.0;        // = b, relative bound ‖H_I (H̄₀+1)^{-1}‖
    double b = 0.0;
    double gap = 0.0;      // ε_gap of the atom
    double energy_q = 0.0; // E(H_q) = E(H) - E(H₀)
    double margin = 0.0;   // min over cluster of (1-δ)^{-1}⟨φ,(P_A⊗P_Ω)φ⟩ - ‖φ‖²; NaN if δ >= 1
    bool in_regime = true; // δ < 1
    int multiplicity = 0;
};

struct OverlapReport {
    std::vector<OverlapPoint> points;
    bool delta_monotone = true;
    bool passed = true;
    double margin_tolerance = 1e-10;
    double slack = 0.10;

    CheckRecord record() const;
};

OverlapPoint overlap_point(const AssembledModel& model, const GroundStateResult& gs, const SpectralConfig& cfg);
// Family ordered by decreasing |g|; δ must not grow by more than `slack` along it.
OverlapReport overlap_delta_check(const std::vector<AssembledModel>& family, const SpectralConfig& cfg,
                                  const Tolerances& tol = {});
// Same verdict from precomputed points.
OverlapReport evaluate_overlap_family(std::vector<OverlapPoint> points, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// m(H) <= m(A) at small coupling; optionally an exact expected cluster size.

struct MultiplicityPoint {
    double g = 0.0;
    int cluster = 0;
    int atom_multiplicity = 0;
    double gap = 0.0;
    double width = 0.0;
    double ratio = 0.0;  // gap / cluster width
    Status status = Status::pass;
};

struct MultiplicityReport {
    std::vector<MultiplicityPoint> points;
    double threshold = 0.0;  // largest |g| at which the check was conclusive
    bool passed = true;

    CheckRecord record() const;
};

MultiplicityReport multiplicity_check(const std::vector<AssembledModel>& family, const SpectralConfig& cfg,
                                      std::optional<int> expected_cluster = std::nullopt,
                                      double min_ratio = 0.0);

// ---------------------------------------------------------------------------
// ‖(H_g - E₀ - z)^{-1} - (H̄₀ - z)^{-1}‖ → 0 and its bound.

struct ResolventPoint {
    double g = 0.0;
    double norm_diff = 0.0;       // n(g)
    double bound = 0.0;           // |g| D(g) D(0) ‖K₀ H_I K₀‖ (NaN if skipped)
    double energy_shift = 0.0;    // |E(H_g) - E(H₀)|
    double energy_bound = 0.0;    // 2 a |g| scale
    double d_g = 0.0;             // D(g)
    bool bound_applicable = true; // a|g| < 1
};

struct ResolventReport {
    std::vector<ResolventPoint> points;
    double a = 0.0;
    double sandwiched = 0.0;  // ‖K₀ H_I K₀‖
    bool monotone = true;
    bool final_ratio_ok = true;
    double final_ratio = 0.0;  // tolerance on n(last) / n(first)
    bool passed = true;

    CheckRecord record() const;
};

// sup_{λ >= lower} |(λ + c) / ((λ - z)²)| by 1-D maximization.
double resolvent_sup(double c, cplx z, double lower);
// D(g) = √(sup_λ |(λ+|g|b)/((1-|g|a)(λ-z)²)|) + 1/|Im z|.
double proof_chain_d(double g, double a, double b, cplx z, double lower);

ResolventReport resolvent_convergence_check(const std::vector<AssembledModel>& family, cplx z,
                                            const SpectralConfig& cfg, const Tolerances& tol = {});

// ---------------------------------------------------------------------------

struct MassiveBoundReport {
    double nu = 0.0;
    double min_slack = 0.0;  // min over vectors of (1/ν)‖dΓ(ω)ψ‖ - ‖Nψ‖
    int vectors = 0;
    double tolerance = 1e-10;
    bool passed = true;

    CheckRecord record() const;
};

MassiveBoundReport massive_bound_check(const AssembledModel& model, const std::vector<Vector>& states,
                                       const Tolerances& tol = {});

// ---------------------------------------------------------------------------

enum class IrRegime { regular, critical };

struct IrPoint {
    double k_min = 0.0;
    int modes = 0;
    double mean_number = 0.0;
    double top_weight = 0.0;
    double ir_sum = 0.0;  // Σ_m |λ_m/ω_m|² over all couplings
    bool reliable = true;
};

struct IrProbeReport {
    IrRegime regime = IrRegime::regular;
    std::vector<IrPoint> points;
    Tolerances tol;
    bool passed = true;
    std::string note;

    CheckRecord record() const;
};

// Family ordered by decreasing k_min.
IrProbeReport ir_probe(const std::vector<AssembledModel>& family, IrRegime regime, const SpectralConfig& cfg,
                       const Tolerances& tol = {});

// ---------------------------------------------------------------------------

struct BindingReport {
    double e_h = 0.0;      // E(H_PF)
    double e_free = 0.0;   // E(H_PF with V = 0)
    double e_hp = 0.0;     // E(h_p)
    double binding = 0.0;  // E_bin
    double slack = 0.0;    // E_bin + E(h_p)
    double tolerance = 0.0;
    Status status = Status::pass;

    CheckRecord record() const;
};

BindingReport binding_energy_check(const model::PfToySpec& spec, const SpectralConfig& cfg, const Tolerances& tol = {});

struct DecayReport {
    double ratio = 0.0;    // sup over the cluster of ‖(G⊗1)φ‖/‖φ‖
    double c_exp = 0.0;
    double a_prime = 0.0;
    double b = 0.0;
    double epsilon = 0.0;
    double v_inf = 0.0;
    double radius = 0.0;   // R'
    Status status = Status::pass;
    std::string note;

    CheckRecord record() const;
};

DecayReport spatial_decay_check(const AssembledModel& pf, const GroundStateResult& gs, double binding_energy,
                                const std::function<double(double)>& weight = [](double x) { return std::abs(x); });

// [x ⊗ 1, H_PF] ψ = (i/m)(p ⊗ 1 - e Ā) ψ for ψ vanishing on the seam sites.
struct CommutatorReport {
    double residual = 0.0;  // relative
    double tolerance = 1e-8;
    bool passed = true;

    CheckRecord record() const;
};

CommutatorReport position_commutator_check(const AssembledModel& pf, const Vector& psi, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Model invariants shared by the model tests and the CLI.

// max |H - H₀ - g H_I| entrywise.
double decomposition_defect(const AssembledModel& model);
// max over modes of ‖(T_m - [a_m, H_I]) restricted to columns in sectors
// <= N_max - reach‖.
double commutator_defect(const AssembledModel& model);

}  // namespace fockgs::verify
