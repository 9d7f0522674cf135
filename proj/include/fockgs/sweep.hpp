// sweep.hpp: declarative model recipes, single-cell verification runs,
// parameter sweeps on a bounded worker pool, and convergence-rate fits.

#pragma once

#include "fockgs/model.hpp"
#include "fockgs/spectral.hpp"
#include "fockgs/verifier.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fockgs::sweep {

enum class ModelKind { spin_boson, gsb, pf_toy };
const char* to_string(ModelKind k);

// λ_j = scale · ω^β · √w on the recipe's grid.
struct CouplingRecipe {
    Matrix b;
    double beta = 0.5;
    double scale = 1.0;
};

// Everything needed to assemble a model, in the units of the config file.
// Unlike GsbSpec it keeps the grid symbolic, so sweeps can change M or k_min.
struct ModelRecipe {
    ModelKind kind = ModelKind::spin_boson;
    double coupling = 0.0;  // α for GSB / spin-boson, e for the PF toy
    int cutoff = 4;
    std::size_t dimension_cap = fock::kDefaultDimensionCap;

    double k_min = 0.1;
    double k_max = 2.0;
    int modes = 4;
    double mass = 0.0;
    model::Quadrature quadrature = model::Quadrature::uniform_midpoint;

    // spin-boson
    double epsilon = 1.0;
    double delta = 0.5;
    double beta = 0.5;

    // gsb
    Matrix atom;
    std::vector<CouplingRecipe> couplings;

    // pf-toy
    int sites = 16;
    double length = 8.0;
    double electron_mass = 1.0;
    double well_depth = 2.0;
    double well_half_width = 1.0;
    double uv_cutoff = std::numeric_limits<double>::infinity();  // φ̂(k) = 1 for k <= Λ, else 0

    // Every violated invariant, each message prefixed by the config field.
    std::vector<std::string> validate() const;

    model::ModeGrid grid() const;
    model::GsbSpec gsb_spec() const;
    model::PfToySpec pf_spec() const;
    model::AssembledModel assemble() const;

    // Axis override: coupling, cutoff, modes or k_min.
    void set(const std::string& axis, double value);
    static bool is_axis(const std::string& name);
};

// Per-cell checks and family (trend) checks, by the names used in --checks.
const std::vector<std::string>& cell_check_names();
const std::vector<std::string>& trend_check_names();
bool is_cell_check(const std::string& name);
bool is_trend_check(const std::string& name);
// Cell checks that apply to a recipe (used for "all").
std::vector<std::string> applicable_checks(const ModelRecipe& recipe);

struct CheckOptions {
    verify::Tolerances tol;
    int random_states = 10;   // number identity on random vectors
    int unitaries = 5;        // mode-basis rotations for the Carleman sum
    int massive_states = 20;  // random vectors for the massive bound
    verify::IrRegime ir_regime = verify::IrRegime::regular;
    cplx z{0.0, 1.0};         // resolvent point
};

struct CellRecord {
    std::size_t index = 0;
    std::vector<std::pair<std::string, double>> parameters;  // axis order
    bool ok = true;
    bool solver_failure = false;
    std::string reason;

    double energy = std::numeric_limits<double>::quiet_NaN();
    int multiplicity = 0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double mean_number = std::numeric_limits<double>::quiet_NaN();
    double overlap = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    double margin = std::numeric_limits<double>::quiet_NaN();
    double top_weight = std::numeric_limits<double>::quiet_NaN();
    double wall_time = 0.0;
    int dimension = 0;
    std::vector<verify::CheckRecord> checks;

    bool any_check_failed() const;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepPlan {
    ModelRecipe base;
    std::vector<SweepAxis> axes;
    std::vector<std::string> checks;
    spectral::SpectralConfig solver;
    CheckOptions options;
    std::uint64_t seed = 12345;
    std::size_t cell_cap = 10000;
    int threads = 1;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    // Axes after the automatic g = 0 anchor is added for trend checks.
    std::vector<SweepAxis> effective_axes() const;
    std::size_t cell_count() const;
};

struct SweepResult {
    std::vector<CellRecord> cells;         // ordered by cell index
    std::vector<verify::CheckRecord> trends;
};

// One model, the requested cell checks, and the summary metrics.
CellRecord run_cell(const ModelRecipe& recipe, const std::vector<std::string>& checks,
                    const spectral::SpectralConfig& solver, const CheckOptions& options, std::uint64_t seed,
                    std::size_t index = 0);

// Cells run on min(threads, cells) workers; failures are recorded per cell.
SweepResult run_sweep(const SweepPlan& plan);

enum class FitModel { geometric, power };

struct FitResult {
    double rate = 0.0;       // geometric: v ≈ C·rate^p; power: v ≈ C·p^rate
    double intercept = 0.0;  // log C
    double r2 = 0.0;
    bool convergent = false; // rate < 1 (geometric) or rate < 0 (power)
};

FitResult fit_convergence(const std::vector<std::pair<double, double>>& series, FitModel model);

}  // namespace fockgs::sweep
