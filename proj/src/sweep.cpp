#include "fockgs/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fockgs::sweep {

namespace {

using verify::CheckRecord;
using verify::Status;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t cell_seed(std::uint64_t base, std::size_t index) {
    return base ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1));
}

bool integral(double v) { return std::isfinite(v) && v == std::floor(v); }

CheckRecord skipped(const std::string& name, const std::string& why) { return {name, Status::skipped, {}, why}; }

// Largest ⟨φ,Nφ⟩ over the ground cluster.
double cluster_number(const model::AssembledModel& m, const Matrix& v) {
    const Matrix c = v.adjoint() * (m.number * v);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::spin_boson: return "spin-boson";
        case ModelKind::gsb: return "gsb";
        case ModelKind::pf_toy: return "pf-toy";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

std::vector<std::string> ModelRecipe::validate() const {
    std::vector<std::string> err;
    auto need = [&err](bool ok, const std::string& msg) {
        if (!ok) err.push_back(msg);
    };
    need(std::isfinite(coupling), "model.coupling: must be finite");
    need(cutoff >= 0, "model.cutoff: must be non-negative");
    need(dimension_cap > 0, "model.dimension_cap: must be positive");
    need(modes >= 1, "grid.modes: must be at least 1");
    need(k_min >= 0.0 && std::isfinite(k_min), "grid.k_min: must be non-negative");
    need(k_max > k_min && std::isfinite(k_max), "grid.k_max: must exceed grid.k_min");
    need(mass >= 0.0 && std::isfinite(mass), "grid.mass: must be non-negative");
    if (quadrature == model::Quadrature::log_midpoint)
        need(k_min > 0.0, "grid.k_min: logarithmic quadrature needs k_min > 0");

    // A massless field with k_min = 0 reaches ω = 0, where negative powers blow up.
    std::vector<double> betas;
    if (kind == ModelKind::spin_boson) betas.push_back(beta);
    if (kind == ModelKind::gsb)
        for (const auto& c : couplings) betas.push_back(c.beta);
    for (double b : betas) {
        need(std::isfinite(b), "model.beta: must be finite");
        if (mass == 0.0 && k_min == 0.0 && b < 0.0) {
            err.push_back("grid.k_min: must be positive for beta < 0 on a massless field (omega reaches 0)");
            break;
        }
    }

    int atom_dim = 2;
    switch (kind) {
        case ModelKind::spin_boson:
            need(std::isfinite(epsilon), "model.epsilon: must be finite");
            need(std::isfinite(delta), "model.delta: must be finite");
            break;
        case ModelKind::gsb: {
            const bool square = atom.rows() > 0 && atom.rows() == atom.cols();
            need(square, "model.atom: must be a non-empty square matrix");
            if (square) need(is_hermitian(atom), "model.atom: must be Hermitian");
            atom_dim = static_cast<int>(atom.rows());
            need(!couplings.empty(), "coupling: at least one [coupling.N] section is required");
            for (std::size_t j = 0; j < couplings.size(); ++j) {
                const std::string field = "coupling." + std::to_string(j + 1) + ".b";
                const auto& b = couplings[j].b;
                if (b.rows() != atom.rows() || b.cols() != atom.cols()) {
                    err.push_back(field + ": shape must match model.atom");
                } else if (!is_hermitian(b)) {
                    err.push_back(field + ": must be Hermitian");
                }
                need(std::isfinite(couplings[j].scale), "coupling." + std::to_string(j + 1) + ".scale: must be finite");
            }
            break;
        }
        case ModelKind::pf_toy:
            need(sites >= 4, "model.sites: must be at least 4");
            need(length > 0.0 && std::isfinite(length), "model.length: must be positive");
            need(electron_mass > 0.0 && std::isfinite(electron_mass), "model.electron_mass: must be positive");
            need(std::isfinite(well_depth), "model.well_depth: must be finite");
            need(well_half_width >= 0.0, "model.well_half_width: must be non-negative");
            need(uv_cutoff > 0.0, "model.uv_cutoff: must be positive");
            atom_dim = 2 * std::max(sites, 0);
            break;
    }
    if (cutoff >= 0 && modes >= 1 && dimension_cap > 0) {
        const std::size_t fdim = fock::OccupationBasis::count_states(modes, cutoff);
        const long double total = static_cast<long double>(fdim) * std::max(atom_dim, 1);
        if (total > static_cast<long double>(dimension_cap)) {
            std::ostringstream os;
            os << "model.cutoff: dimension " << static_cast<double>(total) << " (grid.modes = " << modes
               << ") exceeds model.dimension_cap = " << dimension_cap;
            err.push_back(os.str());
        }
    }
    return err;
}

model::ModeGrid ModelRecipe::grid() const {
    const auto d = mass > 0.0 ? model::Dispersion::massive(mass) : model::Dispersion::massless();
    return model::dispersion_grid(d, k_min, k_max, modes, quadrature);
}

model::GsbSpec ModelRecipe::gsb_spec() const {
    const model::ModeGrid g = grid();
    model::GsbSpec s;
    if (kind == ModelKind::spin_boson) {
        s = model::spin_boson_preset(epsilon, delta, g, beta, coupling, cutoff);
    } else if (kind == ModelKind::gsb) {
        s.a = atom;
        for (const auto& c : couplings) s.couplings.push_back({c.b, c.scale * model::form_factor_preset(g, c.beta)});
        s.alpha = coupling;
        s.grid = g;
        s.cutoff = cutoff;
    } else {
        throw std::logic_error("gsb_spec: recipe is a Pauli-Fierz model");
    }
    s.dimension_cap = dimension_cap;
    return s;
}

model::PfToySpec ModelRecipe::pf_spec() const {
    if (kind != ModelKind::pf_toy) throw std::logic_error("pf_spec: recipe is not a Pauli-Fierz model");
    model::PfToySpec s;
    s.sites = sites;
    s.length = length;
    s.electron_mass = electron_mass;
    s.charge = coupling;
    s.grid = grid();
    s.uv_cutoff.resize(static_cast<std::size_t>(modes));
    for (int m = 0; m < modes; ++m) s.uv_cutoff[static_cast<std::size_t>(m)] = s.grid.k[m] <= uv_cutoff ? 1.0 : 0.0;
    s.cutoff = cutoff;
    s.dimension_cap = dimension_cap;
    s.potential = model::square_well(s, well_depth, well_half_width);
    return s;
}

model::AssembledModel ModelRecipe::assemble() const {
    const auto errors = validate();
    if (!errors.empty()) throw std::invalid_argument(errors.front());
    return kind == ModelKind::pf_toy ? model::assemble_pf_toy(pf_spec()) : model::assemble_gsb(gsb_spec());
}

bool ModelRecipe::is_axis(const std::string& name) {
    return name == "coupling" || name == "cutoff" || name == "modes" || name == "k_min";
}

void ModelRecipe::set(const std::string& axis, double value) {
    if (axis == "coupling") {
        coupling = value;
    } else if (axis == "k_min") {
        k_min = value;
    } else if (axis == "cutoff" || axis == "modes") {
        if (!integral(value)) throw std::invalid_argument("sweep." + axis + ": values must be integers");
        (axis == "cutoff" ? cutoff : modes) = static_cast<int>(value);
    } else {
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    }
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& cell_check_names() {
    static const std::vector<std::string> names{
        "number_identity", "number_formula", "pull_through",   "hs_invariance",   "overlap",
        "multiplicity",    "massive_bound",  "binding_energy", "spatial_decay",   "position_commutator"};
    return names;
}

const std::vector<std::string>& trend_check_names() {
    static const std::vector<std::string> names{"delta_trend", "resolvent_convergence", "ir_probe"};
    return names;
}

bool is_cell_check(const std::string& name) {
    const auto& n = cell_check_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

bool is_trend_check(const std::string& name) {
    const auto& n = trend_check_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<std::string> applicable_checks(const ModelRecipe& recipe) {
    std::vector<std::string> out{"number_identity", "number_formula", "pull_through", "hs_invariance", "overlap",
                                 "multiplicity"};
    if (recipe.mass > 0.0) out.push_back("massive_bound");
    if (recipe.kind == ModelKind::pf_toy) {
        out.push_back("binding_energy");
        out.push_back("spatial_decay");
        out.push_back("position_commutator");
    }
    return out;
}

bool CellRecord::any_check_failed() const {
    return std::any_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.failed(); });
}

// ---------------------------------------------------------------------------

CellRecord run_cell(const ModelRecipe& recipe, const std::vector<std::string>& checks,
                    const spectral::SpectralConfig& solver, const CheckOptions& options, std::uint64_t seed,
                    std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    CellRecord cell;
    cell.index = index;
    const auto& tol = options.tol;
    try {
        const model::AssembledModel m = recipe.assemble();
        cell.dimension = static_cast<int>(m.dim());
        const spectral::GroundStateResult gs = verify::solve_ground(m, solver);
        cell.energy = gs.energy;
        cell.multiplicity = gs.multiplicity;
        cell.gap = gs.gap;
        cell.top_weight = gs.top_weights.empty() ? 0.0 : *std::max_element(gs.top_weights.begin(), gs.top_weights.end());
        cell.mean_number = cluster_number(m, gs.vectors);
        const verify::OverlapPoint op = verify::overlap_point(m, gs, solver);
        cell.overlap = op.overlap;
        cell.delta = op.delta;
        cell.margin = op.margin;

        const bool pf = recipe.kind == ModelKind::pf_toy;
        std::optional<verify::BindingReport> binding;
        for (const auto& name : checks) {
            if (name == "number_identity") {
                verify::NumberReport worst;
                bool all = true;
                std::vector<Vector> states;
                for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) states.push_back(gs.vectors.col(c));
                for (int s = 0; s < options.random_states; ++s)
                    states.push_back(spectral::random_unit_vector(m.dim(), seed + static_cast<std::uint64_t>(s)));
                for (std::size_t i = 0; i < states.size(); ++i) {
                    const auto r = verify::number_identity_check(m, states[i], tol);
                    all = all && r.passed;
                    if (i == 0 || r.err_lhs_mid > worst.err_lhs_mid) worst = r;
                }
                worst.passed = all;
                auto rec = worst.record(name);
                rec.values["states"] = static_cast<double>(states.size());
                cell.checks.push_back(rec);
            } else if (name == "number_formula") {
                cell.checks.push_back(verify::number_formula_check(m, gs, solver, tol).record(name));
            } else if (name == "pull_through") {
                cell.checks.push_back(verify::pull_through_check(m, gs, solver, tol).record());
            } else if (name == "hs_invariance") {
                cell.checks.push_back(verify::hs_invariance_check(m, gs, options.unitaries, seed, solver, tol).record());
            } else if (name == "overlap") {
                const bool ok = op.overlap > 0.0 && (!op.in_regime || op.margin >= -tol.margin);
                CheckRecord r{name, ok ? Status::pass : Status::fail, {}, {}};
                r.values = {{"overlap", op.overlap}, {"delta", op.delta},   {"c", op.c},
                            {"c_int", op.c_int},     {"a", op.a},           {"b", op.b},
                            {"gap", op.gap},         {"energy_q", op.energy_q},
                            {"margin_tolerance", tol.margin}};
                if (op.in_regime) r.values["margin"] = op.margin;
                else r.note = "delta >= 1: inequality not applicable";
                cell.checks.push_back(r);
            } else if (name == "multiplicity") {
                const std::vector<model::AssembledModel> one{m};
                const auto rep = pf ? verify::multiplicity_check(one, solver, 2, tol.cluster_ratio)
                                    : verify::multiplicity_check(one, solver);
                CheckRecord r = rep.record();
                r.status = rep.points.front().status;
                cell.checks.push_back(r);
            } else if (name == "massive_bound") {
                if (!(m.grid.mass > 0.0)) {
                    cell.checks.push_back(skipped(name, "massless dispersion"));
                    continue;
                }
                std::vector<Vector> states;
                for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) states.push_back(gs.vectors.col(c));
                for (int s = 0; s < options.massive_states; ++s)
                    states.push_back(spectral::random_unit_vector(m.dim(), seed + 1000 + static_cast<std::uint64_t>(s)));
                cell.checks.push_back(verify::massive_bound_check(m, states, tol).record());
            } else if (name == "binding_energy" || name == "spatial_decay") {
                if (!pf) {
                    cell.checks.push_back(skipped(name, "Pauli-Fierz models only"));
                    continue;
                }
                if (!binding) binding = verify::binding_energy_check(recipe.pf_spec(), solver, tol);
                if (name == "binding_energy") {
                    cell.checks.push_back(binding->record());
                } else if (binding->status == Status::skipped) {
                    cell.checks.push_back(skipped(name, "no bound state"));
                } else {
                    cell.checks.push_back(verify::spatial_decay_check(m, gs, binding->binding).record());
                }
            } else if (name == "position_commutator") {
                if (!pf) {
                    cell.checks.push_back(skipped(name, "Pauli-Fierz models only"));
                    continue;
                }
                cell.checks.push_back(
                    verify::position_commutator_check(m, spectral::random_unit_vector(m.dim(), seed + 77), tol).record());
            } else {
                throw std::invalid_argument("unknown cell check '" + name + "'");
            }
        }
    } catch (const SolverError& e) {
        cell.ok = false;
        cell.solver_failure = true;
        cell.reason = e.what();
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.reason = e.what();
    }
    cell.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

// ---------------------------------------------------------------------------

void SweepPlan::validate() const {
    if (axes.empty()) throw std::invalid_argument("sweep: at least one axis is required");
    for (const auto& a : axes) {
        if (!ModelRecipe::is_axis(a.name)) throw std::invalid_argument("sweep." + a.name + ": unknown axis");
        if (a.values.empty()) throw std::invalid_argument("sweep." + a.name + ": no values");
        for (double v : a.values) {
            ModelRecipe probe = base;
            probe.set(a.name, v);
            const auto err = probe.validate();
            if (!err.empty()) throw std::invalid_argument("sweep." + a.name + " = " + std::to_string(v) + ": " + err.front());
        }
    }
    if (threads < 1) throw std::invalid_argument("sweep.threads: must be at least 1");
    auto has_axis = [this](const std::string& n) {
        return std::any_of(axes.begin(), axes.end(), [&n](const SweepAxis& a) { return a.name == n; });
    };
    for (const auto& c : checks) {
        if (!is_cell_check(c) && !is_trend_check(c)) throw std::invalid_argument("checks: unknown check '" + c + "'");
        if ((c == "delta_trend" || c == "resolvent_convergence") && !has_axis("coupling"))
            throw std::invalid_argument("checks: " + c + " needs a sweep.coupling axis");
        if (c == "ir_probe" && !has_axis("k_min")) throw std::invalid_argument("checks: ir_probe needs a sweep.k_min axis");
        if (c == "ir_probe" && base.kind == ModelKind::pf_toy)
            throw std::invalid_argument("checks: ir_probe applies to spin-boson models only");
    }
    if (cell_count() > cell_cap) {
        std::ostringstream os;
        os << "sweep: " << cell_count() << " cells exceed sweep.cap = " << cell_cap;
        throw std::invalid_argument(os.str());
    }
}

std::vector<SweepAxis> SweepPlan::effective_axes() const {
    std::vector<SweepAxis> out = axes;
    const bool trend = std::any_of(checks.begin(), checks.end(), [](const std::string& c) { return is_trend_check(c); });
    if (!trend) return out;
    for (auto& a : out)
        if (a.name == "coupling" && std::find(a.values.begin(), a.values.end(), 0.0) == a.values.end())
            a.values.push_back(0.0);
    return out;
}

std::size_t SweepPlan::cell_count() const {
    std::size_t n = 1;
    for (const auto& a : effective_axes()) n *= a.values.size();
    return n;
}

namespace {

// Cartesian product, last axis fastest.
std::vector<std::vector<std::pair<std::string, double>>> enumerate_cells(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<std::pair<std::string, double>>> out(1);
    for (const auto& a : axes) {
        std::vector<std::vector<std::pair<std::string, double>>> next;
        for (const auto& prefix : out)
            for (double v : a.values) {
                auto p = prefix;
                p.emplace_back(a.name, v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

double param(const CellRecord& c, const std::string& name, double fallback) {
    for (const auto& [k, v] : c.parameters)
        if (k == name) return v;
    return fallback;
}

// Cells grouped by every axis except `family`, each group sorted along the
// family axis (decreasing |value|).
std::vector<std::vector<const CellRecord*>> families(const SweepResult& r, const std::string& family) {
    std::map<std::vector<double>, std::vector<const CellRecord*>> groups;
    for (const auto& c : r.cells) {
        std::vector<double> key;
        for (const auto& [k, v] : c.parameters)
            if (k != family) key.push_back(v);
        groups[key].push_back(&c);
    }
    std::vector<std::vector<const CellRecord*>> out;
    for (auto& [key, cells] : groups) {
        std::stable_sort(cells.begin(), cells.end(), [&family](const CellRecord* a, const CellRecord* b) {
            return std::abs(param(*a, family, 0.0)) > std::abs(param(*b, family, 0.0));
        });
        out.push_back(cells);
    }
    return out;
}

void tag_group(CheckRecord& rec, const std::vector<const CellRecord*>& group, const std::string& family,
               std::size_t group_index) {
    rec.values["group"] = static_cast<double>(group_index);
    for (const auto& [k, v] : group.front()->parameters)
        if (k != family) rec.values["param." + k] = v;
}

std::vector<CheckRecord> run_trends(const SweepPlan& plan, const SweepResult& result) {
    std::vector<CheckRecord> out;
    for (const auto& name : plan.checks) {
        if (!is_trend_check(name)) continue;
        const std::string family = name == "ir_probe" ? "k_min" : "coupling";
        const auto groups = families(result, family);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& group = groups[gi];
            CheckRecord rec;
            const auto failed = std::find_if(group.begin(), group.end(), [](const CellRecord* c) { return !c->ok; });
            if (failed != group.end()) {
                rec = {name, Status::inconclusive, {}, "cell " + std::to_string((*failed)->index) + " failed"};
                tag_group(rec, group, family, gi);
                out.push_back(rec);
                continue;
            }
            try {
                if (name == "delta_trend") {
                    std::vector<verify::OverlapPoint> pts;
                    for (const auto* c : group) {
                        verify::OverlapPoint p;
                        p.g = param(*c, "coupling", plan.base.coupling);
                        p.overlap = c->overlap;
                        p.delta = c->delta;
                        p.margin = c->margin;
                        p.in_regime = c->delta < 1.0;
                        p.multiplicity = c->multiplicity;
                        pts.push_back(p);
                    }
                    rec = verify::evaluate_overlap_family(std::move(pts), plan.options.tol).record();
                    rec.check = name;
                } else {
                    std::vector<model::AssembledModel> models;
                    for (const auto* c : group) {
                        ModelRecipe r = plan.base;
                        for (const auto& [k, v] : c->parameters) r.set(k, v);
                        models.push_back(r.assemble());
                    }
                    if (name == "resolvent_convergence") {
                        rec = verify::resolvent_convergence_check(models, plan.options.z, plan.solver, plan.options.tol)
                                  .record();
                    } else {
                        rec = verify::ir_probe(models, plan.options.ir_regime, plan.solver, plan.options.tol).record();
                    }
                }
            } catch (const std::exception& e) {
                rec = {name, Status::inconclusive, {}, e.what()};
            }
            tag_group(rec, group, family, gi);
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan) {
    plan.validate();
    const auto cells = enumerate_cells(plan.effective_axes());
    std::vector<std::string> cell_checks;
    for (const auto& c : plan.checks)
        if (is_cell_check(c)) cell_checks.push_back(c);

    SweepResult result;
    result.cells.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            ModelRecipe r = plan.base;
            CellRecord rec;
            try {
                for (const auto& [k, v] : cells[i]) r.set(k, v);
                rec = run_cell(r, cell_checks, plan.solver, plan.options, cell_seed(plan.seed, i), i);
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.reason = e.what();
            }
            rec.index = i;
            rec.parameters = cells[i];
            result.cells[i] = std::move(rec);
        }
    };
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(plan.threads), cells.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    result.trends = run_trends(plan, result);
    return result;
}

// ---------------------------------------------------------------------------

FitResult fit_convergence(const std::vector<std::pair<double, double>>& series, FitModel model) {
    if (series.size() < 3) throw std::invalid_argument("fit_convergence: need at least three points");
    std::vector<double> x, y;
    for (const auto& [p, v] : series) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("fit_convergence: values must be positive");
        if (model == FitModel::power && !(p > 0.0))
            throw std::invalid_argument("fit_convergence: power fits need positive parameters");
        x.push_back(model == FitModel::power ? std::log(p) : p);
        y.push_back(std::log(v));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_convergence: parameters must not all coincide");
    const double slope = sxy / sxx;
    FitResult out;
    out.intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (out.intercept + slope * x[i]);
        ss_res += r * r;
    }
    out.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    if (model == FitModel::geometric) {
        out.rate = std::exp(slope);
        out.convergent = out.rate < 1.0;
    } else {
        out.rate = slope;
        out.convergent = out.rate < 0.0;
    }
    return out;
}

}  // namespace fockgs::sweep
