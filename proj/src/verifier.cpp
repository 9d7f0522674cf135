#include "fockgs/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fockgs::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Status from_bool(bool ok) { return ok ? Status::pass : Status::fail; }

// V^† diag(d) V for orthonormal columns V.
Matrix compress_diag(const Matrix& v, const RealVector& d) {
    return v.adjoint() * (d.cast<cplx>().asDiagonal() * v);
}

Matrix compress(const Matrix& v, const SparseMatrix& op) { return v.adjoint() * (op * v); }

RealVector hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double rayleigh(const SparseMatrix& h, const Vector& v) { return std::real(v.dot(h * v)) / v.squaredNorm(); }

// Dense matrix of f(H̄₀), column by column.
Matrix h0_function_matrix(const AssembledModel& model, const std::function<double(double)>& f) {
    const Eigen::Index dim = model.dim();
    Matrix out(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        Vector e = Vector::Zero(dim);
        e[c] = 1.0;
        out.col(c) = model.apply_h0_function(f, e);
    }
    return out;
}

Matrix kernel_with(const AssembledModel& model, const spectral::ShiftedResolvent& res, const Vector& phi,
                   double energy) {
    const double ev = rayleigh(model.h, phi);
    Matrix k(model.dim(), model.modes());
    for (int m = 0; m < model.modes(); ++m) {
        const double shift = model.grid.omega[m] + energy - ev;
        k.col(m) = res.apply(shift, model.t[static_cast<std::size_t>(m)] * phi);
    }
    return k;
}

}  // namespace

void Tolerances::validate() const {
    for (double v : {identity, pull_through, budget_factor, budget_floor, margin, trend_slack, final_ratio, cauchy, growth,
                     top_weight_limit, binding, commutator, cluster_ratio})
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("tolerances must be finite and non-negative");
}

const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::skipped: return "skipped";
        case Status::inconclusive: return "inconclusive";
    }
    return "unknown";
}

GroundStateResult solve_ground(const AssembledModel& model, const SpectralConfig& cfg) {
    return spectral::ground_eigenspace(model.h, cfg, model.sector_mask(model.cutoff()));
}

// ---------------------------------------------------------------------------

CheckRecord NumberReport::record(const std::string& name) const {
    CheckRecord r{name, from_bool(passed), {}, {}};
    r.values = {{"lhs", lhs},         {"mid", mid},       {"err_lhs_mid", err_lhs_mid},
                {"top_weight", top_weight}, {"tolerance_lhs_mid", tolerance}};
    if (!std::isnan(rhs)) {
        r.values["rhs"] = rhs;
        r.values["err_lhs_rhs"] = err_lhs_rhs;
        r.values["budget"] = budget;
    }
    return r;
}

NumberReport number_identity_check(const AssembledModel& model, const Vector& phi, const Tolerances& tol) {
    const Vector v = phi / phi.norm();
    NumberReport out;
    out.lhs = std::real(v.dot(model.number * v));
    for (const auto& a : model.lower) out.mid += (a * v).squaredNorm();
    out.err_lhs_mid = std::abs(out.lhs - out.mid);
    out.rhs = kNaN;
    out.top_weight = v.cwiseAbs2().dot(model.sector_mask(model.cutoff()));
    out.tolerance = tol.identity;
    out.passed = out.err_lhs_mid <= tol.identity * std::max(1.0, out.lhs);
    return out;
}

NumberReport number_formula_check(const AssembledModel& model, const GroundStateResult& gs,
                                  const SpectralConfig& cfg, const Tolerances& tol) {
    const spectral::ShiftedResolvent res(model.h, gs.energy, cfg);
    const RealVector top = model.sector_mask(model.cutoff());
    // Report the cluster vector with the largest |lhs - rhs|; pass only if all do.
    NumberReport worst;
    bool all_passed = true;
    for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) {
        const Vector v = gs.vectors.col(c).normalized();
        NumberReport r = number_identity_check(model, v, tol);
        const Matrix k = kernel_with(model, res, v, gs.energy);
        r.rhs = model.g * model.g * k.squaredNorm();
        r.err_lhs_rhs = std::abs(r.lhs - r.rhs);
        r.top_weight = v.cwiseAbs2().dot(top);
        r.budget = tol.budget_factor * r.top_weight + tol.budget_floor;
        r.passed = r.passed && r.err_lhs_rhs <= r.budget;
        all_passed = all_passed && r.passed;
        if (c == 0 || r.err_lhs_rhs > worst.err_lhs_rhs) worst = r;
    }
    worst.passed = all_passed;
    return worst;
}

// ---------------------------------------------------------------------------

CheckRecord PullThroughReport::record() const {
    CheckRecord r{"pull_through", from_bool(passed), {}, {}};
    r.values = {{"max_raw", max_raw}, {"max_corrected", max_corrected}, {"defect_leak", defect_leak},
                {"tolerance", tolerance}};
    for (std::size_t m = 0; m < raw.size(); ++m) {
        r.values["raw_" + std::to_string(m)] = raw[m];
        r.values["defect_" + std::to_string(m)] = defect[m];
        r.values["corrected_" + std::to_string(m)] = corrected[m];
    }
    return r;
}

PullThroughReport pull_through_check(const AssembledModel& model, const GroundStateResult& gs,
                                     const SpectralConfig& cfg, const Tolerances& tol) {
    const spectral::ShiftedResolvent res(model.h, gs.energy, cfg);
    const int modes = model.modes();
    const int support = std::max(0, model.cutoff() - 2 * model.interaction_reach + 1);
    const RealVector outside = RealVector::Ones(model.dim()) - model.sector_mask(support);
    PullThroughReport out;
    out.tolerance = tol.pull_through;
    out.raw.assign(static_cast<std::size_t>(modes), 0.0);
    out.defect.assign(static_cast<std::size_t>(modes), 0.0);
    out.corrected.assign(static_cast<std::size_t>(modes), 0.0);
    for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) {
        const Vector v = gs.vectors.col(c).normalized();
        const double ev = rayleigh(model.h, v);
        const Vector hv = model.h * v;
        for (int m = 0; m < modes; ++m) {
            const auto ms = static_cast<std::size_t>(m);
            const SparseMatrix& a = model.lower[ms];
            const double omega = model.grid.omega[m];
            const double shift = omega + gs.energy - ev;
            const Vector av = a * v;
            const Vector tv = model.t[ms] * v;
            const Vector kappa = res.apply(shift, tv);
            const Vector pred = av + model.g * kappa;
            const Vector dv = model.h * av - a * hv + omega * av + model.g * tv;
            const Vector corr = pred - res.apply(shift, dv);
            out.raw[ms] = std::max(out.raw[ms], pred.norm());
            out.defect[ms] = std::max(out.defect[ms], dv.norm());
            out.corrected[ms] = std::max(out.corrected[ms], corr.norm());
            out.defect_leak = std::max(out.defect_leak, outside.cast<cplx>().cwiseProduct(dv).norm());
        }
    }
    out.max_raw = *std::max_element(out.raw.begin(), out.raw.end());
    out.max_corrected = *std::max_element(out.corrected.begin(), out.corrected.end());
    out.passed = out.max_corrected <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------

CheckRecord HsReport::record() const {
    return {"hs_invariance",
            from_bool(passed),
            {{"sum", sum}, {"max_rel_deviation", max_rel_deviation}, {"trials", trials}, {"tolerance", tolerance}},
            {}};
}

Matrix carleman_kernel(const AssembledModel& model, const Vector& phi, double energy, const SpectralConfig& cfg) {
    const spectral::ShiftedResolvent res(model.h, energy, cfg);
    return kernel_with(model, res, phi / phi.norm(), energy);
}

double carleman_sum(const Matrix& kernel, const Matrix& unitary) {
    if (unitary.rows() != kernel.cols() || unitary.cols() != kernel.cols())
        throw std::invalid_argument("carleman_sum: unitary size must match the number of modes");
    return (kernel * unitary).squaredNorm();
}

Matrix random_unitary(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix z(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(i, j) = cplx(re, im);
        }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

HsReport hs_invariance_check(const AssembledModel& model, const GroundStateResult& gs, int trials,
                             std::uint64_t seed, const SpectralConfig& cfg, const Tolerances& tol) {
    const spectral::ShiftedResolvent res(model.h, gs.energy, cfg);
    HsReport out;
    out.trials = trials;
    out.tolerance = tol.identity;
    const int modes = model.modes();
    for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) {
        const Matrix k = kernel_with(model, res, gs.vectors.col(c).normalized(), gs.energy);
        const double s0 = k.squaredNorm();
        out.sum = std::max(out.sum, s0);
        for (int t = 0; t < trials; ++t) {
            const Matrix u = random_unitary(modes, seed + static_cast<std::uint64_t>(t));
            const double s = carleman_sum(k, u);
            const double dev = std::abs(s - s0) / std::max(s0, std::numeric_limits<double>::min());
            out.max_rel_deviation = std::max(out.max_rel_deviation, s0 == 0.0 ? std::abs(s) : dev);
        }
    }
    out.passed = out.max_rel_deviation <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------

OverlapPoint overlap_point(const AssembledModel& model, const GroundStateResult& gs, const SpectralConfig& cfg) {
    OverlapPoint p;
    p.g = model.g;
    p.multiplicity = gs.multiplicity;
    p.energy_q = gs.energy - model.h0_ground_energy();
    p.gap = model.atom_gap;

    const Matrix& v = gs.vectors;
    p.c = std::sqrt(std::max(0.0, hermitian_eigenvalues(compress(v, model.number)).maxCoeff()));

    // ⟨φ,(P_A⊗P_Ω)φ⟩ on the cluster: the vacuum components form an atom vector.
    const Eigen::Index nf = model.fock_dim();
    Matrix vac(model.atom_dim, v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c)
        for (int a = 0; a < model.atom_dim; ++a) vac(a, c) = v(a * nf, c);
    const Matrix proj = vac.adjoint() * model.atom_ground_projector * vac;
    p.overlap = hermitian_eigenvalues(proj).minCoeff();

    p.a = model::relative_bound(model, cfg.dense_threshold);
    p.b = p.a;
    const double ag = p.a * std::abs(p.g);
    if (ag >= 1.0) {
        p.c_int = kInf;
        p.delta = kInf;
    } else {
        p.c_int = p.a * (p.energy_q + std::abs(p.g) * p.b) / (1.0 - ag) + p.b;
        const double gap_term = std::isinf(p.gap) ? 0.0 : 2.0 * std::abs(p.g) * p.c_int / (p.gap - p.energy_q);
        p.delta = p.c * p.c + gap_term;
    }
    p.in_regime = p.delta < 1.0;
    p.margin = p.in_regime ? p.overlap / (1.0 - p.delta) - 1.0 : kNaN;
    return p;
}

CheckRecord OverlapReport::record() const {
    CheckRecord r{"overlap_delta", from_bool(passed), {}, {}};
    r.values["points"] = static_cast<double>(points.size());
    r.values["margin_tolerance"] = margin_tolerance;
    r.values["trend_slack"] = slack;
    r.values["delta_monotone"] = delta_monotone ? 1.0 : 0.0;
    double min_overlap = kInf, min_margin = kInf;
    for (const auto& p : points) {
        min_overlap = std::min(min_overlap, p.overlap);
        if (p.in_regime) min_margin = std::min(min_margin, p.margin);
    }
    r.values["min_overlap"] = min_overlap;
    if (std::isfinite(min_margin)) r.values["min_margin"] = min_margin;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string s = "_" + std::to_string(i);
        r.values["g" + s] = points[i].g;
        r.values["delta" + s] = points[i].delta;
        r.values["overlap" + s] = points[i].overlap;
    }
    return r;
}

OverlapReport overlap_delta_check(const std::vector<AssembledModel>& family, const SpectralConfig& cfg,
                                  const Tolerances& tol) {
    std::vector<OverlapPoint> points;
    for (const auto& m : family) points.push_back(overlap_point(m, solve_ground(m, cfg), cfg));
    return evaluate_overlap_family(std::move(points), tol);
}

OverlapReport evaluate_overlap_family(std::vector<OverlapPoint> points, const Tolerances& tol) {
    OverlapReport out;
    out.margin_tolerance = tol.margin;
    out.slack = tol.trend_slack;
    out.points = std::move(points);
    bool ok = true;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        const auto& p = out.points[i];
        if (!(p.overlap > 0.0)) ok = false;
        if (p.in_regime && p.margin < -out.margin_tolerance) ok = false;
        if (i > 0) {
            const double prev = out.points[i - 1].delta;
            if (std::isfinite(prev) && p.delta > (1.0 + out.slack) * prev + 1e-14) out.delta_monotone = false;
        }
    }
    out.passed = ok && out.delta_monotone;
    return out;
}

// ---------------------------------------------------------------------------

CheckRecord MultiplicityReport::record() const {
    CheckRecord r{"multiplicity", from_bool(passed), {}, {}};
    r.values["threshold"] = threshold;
    int inconclusive = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::string s = "_" + std::to_string(i);
        r.values["g" + s] = p.g;
        r.values["cluster" + s] = p.cluster;
        r.values["atom_multiplicity" + s] = p.atom_multiplicity;
        r.values["ratio" + s] = p.ratio;
        if (p.status == Status::inconclusive) ++inconclusive;
    }
    r.values["inconclusive"] = inconclusive;
    return r;
}

MultiplicityReport multiplicity_check(const std::vector<AssembledModel>& family, const SpectralConfig& cfg,
                                      std::optional<int> expected_cluster, double min_ratio) {
    MultiplicityReport out;
    for (const auto& m : family) {
        const GroundStateResult gs = solve_ground(m, cfg);
        MultiplicityPoint p;
        p.g = m.g;
        p.cluster = gs.multiplicity;
        p.atom_multiplicity = m.atom_multiplicity;
        p.gap = gs.gap;
        p.width = gs.cluster_width;
        p.ratio = p.gap / std::max(p.width, std::numeric_limits<double>::epsilon() * gs.scale);
        if (p.gap < 10.0 * cfg.degeneracy_gap * gs.scale) {
            p.status = Status::inconclusive;
        } else if (expected_cluster) {
            p.status = from_bool(p.cluster == *expected_cluster && p.ratio >= min_ratio);
        } else {
            p.status = from_bool(p.cluster <= p.atom_multiplicity);
        }
        if (p.status == Status::fail) out.passed = false;
        out.points.push_back(p);
    }
    std::vector<const MultiplicityPoint*> order;
    for (const auto& p : out.points) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const MultiplicityPoint* x, const MultiplicityPoint* y) { return std::abs(x->g) < std::abs(y->g); });
    for (const auto* p : order) {
        if (p->status != Status::pass) break;
        out.threshold = std::abs(p->g);
    }
    return out;
}

// ---------------------------------------------------------------------------

double resolvent_sup(double c, cplx z, double lower) {
    const double x = z.real();
    const double y = z.imag();
    if (y == 0.0) throw std::invalid_argument("resolvent_sup: Im z must be non-zero");
    auto f = [&](double s) {
        const double lam = lower + s;
        const double d = lam - x;
        return std::abs(lam + c) / (d * d + y * y);
    };
    // Log-spaced scan of s = λ - lower, then golden-section refinement.
    const double scale = 1.0 + std::abs(x - lower) + std::abs(y) + std::abs(c + lower);
    const int samples = 4000;
    const double lo = std::log(1e-10 * scale), hi = std::log(1e10 * scale);
    std::vector<double> s(samples + 1);
    s[0] = 0.0;
    for (int i = 1; i <= samples; ++i) s[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * (i - 1) / (samples - 1));
    std::size_t best = 0;
    double fbest = f(0.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double v = f(s[i]);
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    double a = s[best == 0 ? 0 : best - 1];
    double b = s[std::min(best + 1, s.size() - 1)];
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - r * (b - a), c2 = a + r * (b - a);
    double f1 = f(c1), f2 = f(c2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + b); ++it) {
        if (f1 > f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - r * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + r * (b - a);
            f2 = f(c2);
        }
    }
    return std::max({fbest, f1, f2});
}

double proof_chain_d(double g, double a, double b, cplx z, double lower) {
    const double ag = std::abs(g) * a;
    if (ag >= 1.0) return kInf;
    return std::sqrt(resolvent_sup(std::abs(g) * b, z, lower) / (1.0 - ag)) + 1.0 / std::abs(z.imag());
}

CheckRecord ResolventReport::record() const {
    CheckRecord r{"resolvent_convergence", from_bool(passed), {}, {}};
    r.values = {{"a", a}, {"sandwiched", sandwiched}, {"monotone", monotone ? 1.0 : 0.0},
                {"final_ratio_ok", final_ratio_ok ? 1.0 : 0.0}, {"final_ratio_tolerance", final_ratio}};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::string s = "_" + std::to_string(i);
        r.values["g" + s] = p.g;
        r.values["norm_diff" + s] = p.norm_diff;
        if (p.bound_applicable) r.values["bound" + s] = p.bound;
        r.values["energy_shift" + s] = p.energy_shift;
        r.values["energy_bound" + s] = p.energy_bound;
    }
    return r;
}

ResolventReport resolvent_convergence_check(const std::vector<AssembledModel>& family, cplx z,
                                            const SpectralConfig& cfg, const Tolerances& tol) {
    if (family.empty()) throw std::invalid_argument("resolvent_convergence_check: empty family");
    if (z.imag() == 0.0) throw std::invalid_argument("resolvent_convergence_check: Im z must be non-zero");
    const AssembledModel& ref = family.front();
    const Eigen::Index dim = ref.dim();
    if (dim > cfg.dense_threshold)
        throw CapacityError("resolvent_convergence_check: dimension exceeds the dense threshold");

    ResolventReport out;
    out.final_ratio = tol.final_ratio;
    out.a = model::relative_bound(ref, cfg.dense_threshold);
    const double b = out.a;
    const Matrix k0 = h0_function_matrix(ref, [](double x) { return 1.0 / std::sqrt(x + 1.0); });
    out.sandwiched = spectral::dense_spectral_norm(k0 * (ref.hi * k0));
    // (H̄₀ - z)^{-1} is complex-valued, so it is built from the atom eigenbasis directly.
    Matrix free_res(dim, dim);
    {
        const Eigen::Index nf = ref.fock_dim();
        const Matrix& u = ref.atom_modes;
        for (Eigen::Index col = 0; col < dim; ++col) {
            Vector e = Vector::Zero(dim);
            e[col] = 1.0;
            Eigen::Map<const Matrix> in(e.data(), nf, ref.atom_dim);
            Matrix w = in * u.conjugate();
            for (Eigen::Index a = 0; a < ref.atom_dim; ++a)
                for (Eigen::Index j = 0; j < nf; ++j)
                    w(j, a) /= cplx(ref.atom_levels[a] + ref.field_energies[j] - ref.atom_energy) - z;
            Vector o(dim);
            Eigen::Map<Matrix>(o.data(), nf, ref.atom_dim) = w * u.transpose();
            free_res.col(col) = o;
        }
    }
    const double d0 = proof_chain_d(0.0, out.a, b, z, 0.0);
    const double e0 = ref.h0_ground_energy();
    const double scale = std::max(1.0, std::abs(e0));

    bool ok = true;
    for (const auto& m : family) {
        if (m.dim() != dim) throw std::invalid_argument("resolvent_convergence_check: family dimensions differ");
        ResolventPoint p;
        p.g = m.g;
        Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(m.h)};
        const RealVector lam = es.eigenvalues().array() - e0;
        Vector inv(dim);
        for (Eigen::Index i = 0; i < dim; ++i) inv[i] = 1.0 / (cplx(lam[i]) - z);
        const Matrix rg = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
        p.norm_diff = spectral::dense_spectral_norm(rg - free_res);
        p.energy_shift = std::abs(lam[0]);
        p.energy_bound = 2.0 * out.a * std::abs(p.g) * scale;
        p.bound_applicable = out.a * std::abs(p.g) < 1.0;
        if (p.bound_applicable) {
            p.d_g = proof_chain_d(p.g, out.a, b, z, lam[0]);
            p.bound = std::abs(p.g) * p.d_g * d0 * out.sandwiched;
            if (p.norm_diff > p.bound * (1.0 + 1e-8) + 1e-12) ok = false;
        } else {
            p.d_g = kInf;
            p.bound = kNaN;
        }
        if (p.energy_shift > p.energy_bound + 1e-12) ok = false;
        out.points.push_back(p);
    }
    for (std::size_t i = 1; i < out.points.size(); ++i)
        if (out.points[i].norm_diff > (1.0 + tol.trend_slack) * out.points[i - 1].norm_diff + 1e-14)
            out.monotone = false;
    out.final_ratio_ok = out.points.back().norm_diff <= tol.final_ratio * out.points.front().norm_diff + 1e-14;
    out.passed = ok && out.monotone && out.final_ratio_ok;
    return out;
}

// ---------------------------------------------------------------------------

CheckRecord MassiveBoundReport::record() const {
    return {"massive_bound",
            from_bool(passed),
            {{"nu", nu}, {"min_slack", min_slack}, {"vectors", vectors}, {"tolerance", tolerance}},
            {}};
}

MassiveBoundReport massive_bound_check(const AssembledModel& model, const std::vector<Vector>& states,
                                       const Tolerances& tol) {
    MassiveBoundReport out;
    out.tolerance = tol.margin;
    out.nu = model.grid.mass;
    if (!(out.nu > 0.0)) throw std::invalid_argument("massive_bound_check: dispersion must be massive");
    out.min_slack = kInf;
    for (const auto& s : states) {
        const Vector v = s / s.norm();
        const double lhs = (model.number * v).norm();
        const double rhs = (model.free_field * v).norm() / out.nu;
        const double slack = rhs - lhs;
        out.min_slack = std::min(out.min_slack, slack);
        if (slack < -out.tolerance * std::max(1.0, lhs)) out.passed = false;
        ++out.vectors;
    }
    return out;
}

// ---------------------------------------------------------------------------

CheckRecord IrProbeReport::record() const {
    CheckRecord r{"ir_probe", Status::pass, {}, note};
    bool reliable = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::string s = "_" + std::to_string(i);
        r.values["k_min" + s] = p.k_min;
        r.values["mean_number" + s] = p.mean_number;
        r.values["top_weight" + s] = p.top_weight;
        r.values["ir_sum" + s] = p.ir_sum;
        reliable = reliable && p.reliable;
    }
    r.values["regular"] = regime == IrRegime::regular ? 1.0 : 0.0;
    r.values["cauchy_tolerance"] = tol.cauchy;
    r.values["growth_tolerance"] = tol.growth;
    r.values["top_weight_limit"] = tol.top_weight_limit;
    r.values["trend_slack"] = tol.trend_slack;
    r.status = !reliable ? Status::inconclusive : from_bool(passed);
    return r;
}

IrProbeReport ir_probe(const std::vector<AssembledModel>& family, IrRegime regime, const SpectralConfig& cfg,
                       const Tolerances& tol) {
    if (family.size() < 3) throw std::invalid_argument("ir_probe: need at least three infrared cutoffs");
    IrProbeReport out;
    out.regime = regime;
    out.tol = tol;
    for (const auto& m : family) {
        const GroundStateResult gs = solve_ground(m, cfg);
        IrPoint p;
        p.k_min = m.grid.k_min;
        p.modes = m.modes();
        p.mean_number = hermitian_eigenvalues(compress(gs.vectors, m.number)).maxCoeff();
        p.top_weight = gs.top_weights.empty() ? 0.0 : *std::max_element(gs.top_weights.begin(), gs.top_weights.end());
        p.reliable = p.top_weight < tol.top_weight_limit;
        // Σ_m 2‖T_m‖²/ω_m², read off the atom block of T_m at the Fock vacuum.
        const Eigen::Index nf = m.fock_dim();
        for (int k = 0; k < m.modes(); ++k) {
            Matrix blk(m.atom_dim, m.atom_dim);
            const SparseMatrix& t = m.t[static_cast<std::size_t>(k)];
            for (int i = 0; i < m.atom_dim; ++i)
                for (int j = 0; j < m.atom_dim; ++j) blk(i, j) = t.coeff(i * nf, j * nf);
            const double n = spectral::dense_spectral_norm(blk);
            p.ir_sum += 2.0 * n * n / (m.grid.omega[k] * m.grid.omega[k]);
        }
        out.points.push_back(p);
    }
    const auto& pts = out.points;
    const std::size_t n = pts.size();
    std::ostringstream note;
    if (regime == IrRegime::regular) {
        bool shrinking = true;
        for (std::size_t i = 2; i < n; ++i) {
            const double d_prev = std::abs(pts[i - 1].mean_number - pts[i - 2].mean_number);
            const double d = std::abs(pts[i].mean_number - pts[i - 1].mean_number);
            if (d > (1.0 + tol.trend_slack) * d_prev + 1e-14) shrinking = false;
        }
        const double rel = std::abs(pts[n - 1].mean_number - pts[n - 2].mean_number) /
                           std::max(std::abs(pts[n - 1].mean_number), std::numeric_limits<double>::min());
        out.passed = shrinking && rel < tol.cauchy;
        note << "cauchy: differences shrinking=" << (shrinking ? "yes" : "no") << ", final relative change=" << rel;
    } else {
        bool increasing = true;
        for (std::size_t i = 1; i < n; ++i)
            if (!(pts[i].mean_number > pts[i - 1].mean_number)) increasing = false;
        const double last = pts[n - 1].mean_number - pts[n - 2].mean_number;
        const double prev = pts[n - 2].mean_number - pts[n - 3].mean_number;
        const bool sustained = last >= tol.growth * prev;
        out.passed = increasing && sustained;
        note << "growth: increasing=" << (increasing ? "yes" : "no") << ", final/previous increment="
             << (prev != 0.0 ? last / prev : kNaN);
    }
    for (const auto& p : pts)
        if (!p.reliable) note << "; k_min=" << p.k_min << " unreliable (top weight " << p.top_weight << ")";
    out.note = note.str();
    return out;
}

// ---------------------------------------------------------------------------

CheckRecord BindingReport::record() const {
    return {"binding_energy",
            status,
            {{"e_h", e_h},
             {"e_free", e_free},
             {"e_hp", e_hp},
             {"binding", binding},
             {"slack", slack},
             {"tolerance", tolerance}},
            status == Status::skipped ? "h_p has no bound state" : ""};
}

BindingReport binding_energy_check(const model::PfToySpec& spec, const SpectralConfig& cfg, const Tolerances& tol) {
    BindingReport out;
    Eigen::SelfAdjointEigenSolver<Matrix> hp(model::electron_hamiltonian(spec), Eigen::EigenvaluesOnly);
    out.e_hp = hp.eigenvalues()[0];
    const double spread = std::max(1.0, hp.eigenvalues().cwiseAbs().maxCoeff());
    if (!(out.e_hp < -1e-12 * spread)) {
        out.status = Status::skipped;
        return out;
    }
    const AssembledModel full = model::assemble_pf_toy(spec);
    model::PfToySpec free = spec;
    std::fill(free.potential.begin(), free.potential.end(), 0.0);
    const AssembledModel bare = model::assemble_pf_toy(free);
    out.e_h = solve_ground(full, cfg).energy;
    out.e_free = solve_ground(bare, cfg).energy;
    out.binding = out.e_free - out.e_h;
    out.slack = out.binding + out.e_hp;
    out.tolerance = tol.binding * std::max(1.0, std::abs(out.e_h));
    out.status = from_bool(out.slack >= -out.tolerance);
    return out;
}

CheckRecord DecayReport::record() const {
    return {"spatial_decay",
            status,
            {{"ratio", ratio},
             {"c_exp", c_exp},
             {"a_prime", a_prime},
             {"b", b},
             {"epsilon", epsilon},
             {"v_inf", v_inf},
             {"radius", radius}},
            note};
}

DecayReport spatial_decay_check(const AssembledModel& pf, const GroundStateResult& gs, double binding_energy,
                                const std::function<double(double)>& weight) {
    if (!pf.pf) throw std::invalid_argument("spatial_decay_check: not a Pauli-Fierz model");
    const model::PfToySpec& spec = *pf.pf;
    const int n = spec.sites;
    const double h = spec.spacing();
    const Eigen::Index nf = pf.fock_dim();

    DecayReport out;
    std::vector<double> gx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) gx[static_cast<std::size_t>(i)] = weight(spec.position(i));
    RealVector g2(pf.dim());
    for (int i = 0; i < n; ++i) g2.segment(2 * i * nf, 2 * nf).setConstant(gx[static_cast<std::size_t>(i)] * gx[static_cast<std::size_t>(i)]);
    out.ratio = std::sqrt(std::max(0.0, hermitian_eigenvalues(compress_diag(gs.vectors, g2)).maxCoeff()));

    double grad = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        grad = std::max(grad, std::abs(gx[static_cast<std::size_t>(i + 1)] - gx[static_cast<std::size_t>(i)]) / h);
    out.b = grad * grad / (2.0 * spec.electron_mass);
    if (out.b == 0.0) {
        out.status = Status::skipped;
        out.note = "weight has zero gradient";
        return out;
    }

    std::vector<double> vminus(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vminus[static_cast<std::size_t>(i)] = std::max(0.0, -spec.potential[static_cast<std::size_t>(i)]);
    out.v_inf = std::max(vminus.front(), vminus.back());
    out.epsilon = binding_energy / 10.0;
    const double denom = binding_energy - out.v_inf - out.epsilon;
    if (!(denom > 0.0)) {
        out.status = Status::skipped;
        out.note = "binding energy does not exceed the potential at infinity";
        return out;
    }
    out.radius = 0.0;
    for (int i = 0; i < n; ++i)
        if (std::abs(vminus[static_cast<std::size_t>(i)] - out.v_inf) > out.epsilon)
            out.radius = std::max(out.radius, std::abs(spec.position(i)));
    for (int i = 0; i < n; ++i)
        if (std::abs(spec.position(i)) <= out.radius)
            out.a_prime = std::max(out.a_prime, gx[static_cast<std::size_t>(i)] * gx[static_cast<std::size_t>(i)] *
                                                   vminus[static_cast<std::size_t>(i)]);
    out.c_exp = std::sqrt((out.a_prime + out.b) / denom);
    out.status = from_bool(out.ratio <= out.c_exp * (1.0 + 1e-8));
    return out;
}

CheckRecord CommutatorReport::record() const {
    return {"position_commutator", from_bool(passed), {{"residual", residual}, {"tolerance", tolerance}}, {}};
}

CommutatorReport position_commutator_check(const AssembledModel& pf, const Vector& psi, const Tolerances& tol) {
    if (!pf.pf_ops) throw std::invalid_argument("position_commutator_check: not a Pauli-Fierz model");
    const auto& ops = *pf.pf_ops;
    const Vector v = ops.interior.cast<cplx>().cwiseProduct(psi);
    const Vector lhs = ops.position * (pf.h * v) - pf.h * (ops.position * v);
    const Vector rhs = (kI / pf.pf->electron_mass) * (ops.momentum * v - pf.g * (ops.link_field * v));
    CommutatorReport out;
    out.tolerance = tol.commutator;
    out.residual = (lhs - rhs).norm() / std::max(rhs.norm(), std::numeric_limits<double>::min());
    out.passed = out.residual <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------

double decomposition_defect(const AssembledModel& model) {
    return max_abs(SparseMatrix(model.h - model.h0 - model.g * model.hi));
}

double commutator_defect(const AssembledModel& model) {
    const RealVector keep = RealVector::Ones(model.dim()) - model.sector_mask(model.cutoff() - model.interaction_reach + 1);
    double worst = 0.0;
    for (int m = 0; m < model.modes(); ++m) {
        const SparseMatrix& a = model.lower[static_cast<std::size_t>(m)];
        const SparseMatrix comm = SparseMatrix(a * model.hi) - SparseMatrix(model.hi * a);
        const SparseMatrix diff = SparseMatrix(model.t[static_cast<std::size_t>(m)] - comm) * keep.cast<cplx>().asDiagonal();
        worst = std::max(worst, max_abs(diff));
    }
    return worst;
}

}  // namespace fockgs::verify
