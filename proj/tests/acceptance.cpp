// Acceptance run: one PASS/FAIL line per criterion, each timed against its
// budget. Exit status is 0 only if every line passes.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "fockgs/cli.hpp"
#include "fockgs/fock.hpp"
#include "fockgs/model.hpp"
#include "fockgs/spectral.hpp"
#include "fockgs/verifier.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fockgs;
using namespace fockgs::model;
using namespace fockgs::verify;

namespace {

const spectral::SpectralConfig kCfg{};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

Matrix dense(const fock::FockOperator& op) { return Matrix(op.matrix); }

// ---------------------------------------------------------------------------

Outcome exact_identities() {
    Outcome o;
    // ⟨N⟩ = Σ‖a_m φ‖² on random states and ground states.
    double worst = 0.0;
    const std::vector<AssembledModel> models{assemble_gsb(fixture::spin_boson(0.3)),
                                             assemble_gsb(fixture::degenerate_atom(0.1)),
                                             assemble_gsb(fixture::displaced_oscillator(1.0, 1.0, 1.0, 0.2, 12))};
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = number_identity_check(models[0], spectral::random_unit_vector(models[0].dim(), s));
        worst = std::max(worst, r.err_lhs_mid / std::max(1.0, r.lhs));
    }
    for (const auto& m : models) {
        const auto gs = solve_ground(m, kCfg);
        for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c) {
            const auto r = number_identity_check(m, gs.vectors.col(c));
            worst = std::max(worst, r.err_lhs_mid / std::max(1.0, r.lhs));
        }
    }
    o.require(worst <= 1e-10, "number identity");
    o.note("number identity rel err " + fmt(worst));

    // Carleman sum under mode-basis unitaries.
    const auto& sb = models[0];
    const auto hs = hs_invariance_check(sb, solve_ground(sb, kCfg), 5, 2024, kCfg);
    o.require(hs.passed && hs.max_rel_deviation <= 1e-10, "Carleman invariance");
    o.note("Carleman dev " + fmt(hs.max_rel_deviation));

    // CCR and [dΓ(ω), a_m] below the cutoff.
    auto b = fock::build_basis(3, 4);
    const Eigen::Index d = static_cast<Eigen::Index>(b->dim());
    std::vector<Matrix> a, ad;
    for (int m = 0; m < 3; ++m) {
        a.push_back(dense(fock::ladder_op(b, m, fock::Ladder::lower)));
        ad.push_back(dense(fock::ladder_op(b, m, fock::Ladder::raise)));
    }
    const RealVector below = fock::sector_mask(*b, 0) - fock::sector_mask(*b, b->cutoff());
    RealVector w(3);
    w << 0.7, 1.1, 2.3;
    const Matrix dg = dense(fock::second_quantization(b, w));
    double ccr = 0.0, comm = 0.0;
    for (int t = 0; t < 3; ++t) {
        const Vector psi = spectral::random_unit_vector(d, 500 + static_cast<std::uint64_t>(t)).cwiseProduct(below.cast<cplx>());
        for (int m = 0; m < 3; ++m) {
            for (int n = 0; n < 3; ++n) {
                const Vector lhs = (a[m] * ad[n] - ad[n] * a[m]) * psi;
                ccr = std::max(ccr, (lhs - (m == n ? psi : Vector::Zero(d))).norm());
                ccr = std::max(ccr, ((a[m] * a[n] - a[n] * a[m]) * psi).norm());
            }
            comm = std::max(comm, ((dg * a[m] - a[m] * dg + w[m] * a[m]) * psi).norm());
        }
    }
    o.require(ccr <= 1e-14 && comm <= 1e-14, "CCR / [dGamma, a]");
    o.note("CCR " + fmt(ccr) + ", [dGamma,a] " + fmt(comm));

    // A_M = (N+1)^{-1/2} Σ_{m<M} a†a (N+1)^{-1/2}.
    const Matrix num = dense(fock::number_operator(b));
    Matrix inv_sqrt = Matrix::Zero(d, d), partial = Matrix::Zero(d, d), ratio = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        inv_sqrt(i, i) = 1.0 / std::sqrt(num(i, i).real() + 1.0);
        ratio(i, i) = num(i, i) / (num(i, i) + 1.0);
    }
    double norm_max = 0.0;
    for (int m = 0; m < 3; ++m) {
        partial += ad[m] * a[m];
        norm_max = std::max(norm_max, spectral::dense_spectral_norm(inv_sqrt * partial * inv_sqrt));
    }
    const double full_err = (inv_sqrt * partial * inv_sqrt - ratio).norm();
    o.require(norm_max <= 1.0 + 1e-14 && full_err <= 1e-14, "A_M");
    o.note("max|A_M| " + fmt(norm_max, 16) + ", A_M(full) err " + fmt(full_err));

    // dΓ point spectrum on (M = 2, N_max = 3) against brute-force occupation sums.
    const std::vector<double> s{0.37, 1.21};
    RealVector sv(2);
    sv << s[0], s[1];
    const RealVector ev = spectral::full_spectrum_small(fock::second_quantization(fock::build_basis(2, 3), sv).matrix);
    const auto ref = oracle::occupation_sums(s, 3);
    double spec = ev.size() == static_cast<Eigen::Index>(ref.size()) ? 0.0 : 1.0;
    for (std::size_t i = 0; spec < 1.0 && i < ref.size(); ++i)
        spec = std::max(spec, std::abs(ev[static_cast<Eigen::Index>(i)] - ref[i]));
    o.require(spec <= 1e-13, "dGamma spectrum");
    o.note("dGamma spectrum err " + fmt(spec));
    return o;
}

Outcome displaced_oscillator() {
    Outcome o;
    const oracle::DisplacedOscillator ref{1.0, 1.0, 1.0, 0.2};
    const auto m = assemble_gsb(fixture::displaced_oscillator(1.0, 1.0, 1.0, 0.2, 12));
    const auto gs = solve_ground(m, kCfg);
    o.require(gs.multiplicity == 1, "nondegenerate ground state");
    o.require(std::abs(gs.energy - ref.energy()) <= 1e-6, "energy");
    o.note("E " + fmt(gs.energy, 10) + " (oracle " + fmt(ref.energy(), 10) + ")");

    const auto n = number_formula_check(m, gs, kCfg);
    const double dn = std::max({std::abs(n.lhs - ref.mean_number()), std::abs(n.mid - ref.mean_number()),
                                std::abs(n.rhs - ref.mean_number())});
    o.require(dn <= 1e-6, "<N> three routes");
    o.note("<N> " + fmt(n.lhs, 10) + "/" + fmt(n.mid, 10) + "/" + fmt(n.rhs, 10));

    const auto ov = overlap_point(m, gs, kCfg);
    o.require(std::abs(ov.overlap - ref.vacuum_overlap()) <= 1e-4, "overlap");
    o.note("overlap " + fmt(ov.overlap, 8) + " (oracle " + fmt(ref.vacuum_overlap(), 8) + ")");

    const Vector phi = gs.vectors.col(0);
    const Vector aphi = m.lower[0] * phi;
    const cplx coeff = phi.dot(aphi);
    const double eig_err = (aphi - ref.amplitude() * phi).norm();
    o.require(eig_err <= 1e-5, "a phi = c phi");
    o.note("<phi,a phi> " + fmt(coeff.real(), 10) + " (oracle " + fmt(ref.amplitude(), 10) + "), residual " +
           fmt(eig_err));
    return o;
}

Outcome pull_through_convergence() {
    Outcome o;
    std::vector<std::vector<double>> raw;
    double corrected = 0.0;
    for (int cutoff : {4, 6, 8}) {
        const auto g = dispersion_grid(Dispersion::massless(), 0.5, 1.5, 2);
        const auto m = assemble_gsb(spin_boson_preset(1.0, 0.5, g, 0.5, 0.2, cutoff));
        const auto p = pull_through_check(m, solve_ground(m, kCfg), kCfg);
        raw.push_back(p.raw);
        corrected = std::max(corrected, p.max_corrected);
        o.note("N_max=" + std::to_string(cutoff) + " raw " + fmt(p.raw[0]) + "," + fmt(p.raw[1]));
    }
    for (std::size_t step = 1; step < raw.size(); ++step)
        for (std::size_t mode = 0; mode < raw[step].size(); ++mode)
            o.require(raw[step][mode] * 5.0 <= raw[step - 1][mode],
                      "5x drop, mode " + std::to_string(mode) + " step " + std::to_string(step));
    o.require(corrected <= 1e-8, "corrected residual");
    o.note("max corrected " + fmt(corrected));
    return o;
}

Outcome multiplicity_suite() {
    Outcome o;
    std::vector<AssembledModel> nondeg, deg;
    for (double a : {0.05, 0.1, 0.2}) {
        nondeg.push_back(assemble_gsb(fixture::spin_boson(a)));
        deg.push_back(assemble_gsb(fixture::degenerate_atom(a)));
    }
    const auto r1 = multiplicity_check(nondeg, kCfg);
    bool ones = true;
    for (const auto& p : r1.points) ones = ones && p.cluster == 1 && p.atom_multiplicity == 1;
    o.require(r1.passed && ones, "nondegenerate spin-boson");
    const auto r2 = multiplicity_check(deg, kCfg);
    std::string clusters;
    for (const auto& p : r2.points) clusters += std::to_string(p.cluster);
    o.require(r2.passed, "degenerate atom");
    o.note("m(H) spin-boson 1,1,1; degenerate atom clusters " + clusters);

    std::vector<AssembledModel> pf{assemble_pf_toy(fixture::pf_toy(0.0)), assemble_pf_toy(fixture::pf_toy(0.05))};
    const auto r3 = multiplicity_check(pf, kCfg, 2, 1e3);
    o.require(r3.passed, "PF spin cluster");
    for (const auto& p : r3.points) o.note("PF e=" + fmt(p.g) + " cluster " + std::to_string(p.cluster) + " ratio " + fmt(p.ratio));
    return o;
}

Outcome overlap_delta() {
    Outcome o;
    std::vector<AssembledModel> fam;
    for (double a : {0.2, 0.1, 0.05, 0.025}) fam.push_back(assemble_gsb(fixture::spin_boson(a)));
    const auto r = overlap_delta_check(fam, kCfg);
    o.require(r.passed, "overlap/delta");
    for (const auto& p : r.points)
        o.note("a=" + fmt(p.g) + " delta " + fmt(p.delta) + " overlap " + fmt(p.overlap, 6) +
               (p.in_regime ? " margin " + fmt(p.margin) : " (delta>=1)"));
    return o;
}

Outcome resolvent_convergence() {
    Outcome o;
    std::vector<AssembledModel> fam;
    for (double a : {0.4, 0.2, 0.1, 0.05}) fam.push_back(assemble_gsb(fixture::spin_boson(a, 3, 4)));
    o.require(fam.front().dim() <= 500, "dense dimension");
    const auto r = resolvent_convergence_check(fam, cplx(0.0, 1.0), kCfg);
    o.require(r.monotone, "n(g) decreasing");
    o.require(r.final_ratio_ok, "final <= first/4");
    o.require(r.passed, "bounds");
    o.note("dim " + std::to_string(fam.front().dim()) + ", a " + fmt(r.a, 4));
    for (const auto& p : r.points)
        o.note("a=" + fmt(p.g) + " n " + fmt(p.norm_diff) + " <= " + fmt(p.bound) + ", |dE| " + fmt(p.energy_shift) +
               " <= " + fmt(p.energy_bound));
    return o;
}

Outcome massive_bound() {
    Outcome o;
    for (double nu : {0.5, 1.0}) {
        const auto m = assemble_gsb(fixture::spin_boson(0.2, 3, 4, 1.0, 0.5, 0.5, nu));
        std::vector<Vector> states{solve_ground(m, kCfg).vectors.col(0)};
        for (std::uint64_t s = 0; s < 20; ++s) states.push_back(spectral::random_unit_vector(m.dim(), 900 + s));
        const auto r = massive_bound_check(m, states);
        o.require(r.passed && r.min_slack >= -1e-10, "nu=" + fmt(nu));
        o.note("nu=" + fmt(nu) + " min slack " + fmt(r.min_slack) + " over " + std::to_string(r.vectors) + " states");
    }
    return o;
}

Outcome ir_dichotomy() {
    Outcome o;
    auto family = [](double beta) {
        std::vector<AssembledModel> fam;
        for (double k_min : {0.1, 0.05, 0.025, 0.0125}) {
            const int octaves = static_cast<int>(std::lround(std::log2(0.8 / k_min)));
            const auto g = dispersion_grid(Dispersion::massless(), k_min, 0.8, 2 * octaves, Quadrature::log_midpoint);
            fam.push_back(assemble_gsb(spin_boson_preset(0.0, 1.0, g, beta, 0.05, 3)));
        }
        return fam;
    };
    for (auto [beta, regime] : {std::pair{0.5, IrRegime::regular}, std::pair{-0.5, IrRegime::critical}}) {
        const auto r = ir_probe(family(beta), regime, kCfg);
        const auto rec = r.record();
        o.require(rec.status == Status::pass, "beta=" + fmt(beta));
        std::string ns;
        int flagged = 0;
        for (const auto& p : r.points) {
            ns += (ns.empty() ? "" : ",") + fmt(p.mean_number, 5);
            if (!p.reliable) ++flagged;
        }
        o.note("beta=" + fmt(beta) + " <N> " + ns + " flagged " + std::to_string(flagged) +
               (r.note.empty() ? "" : " [" + r.note + "]"));
    }
    return o;
}

Outcome pf_inequalities() {
    Outcome o;
    for (double e : {0.0, 0.05, 0.1}) {
        const auto spec = fixture::pf_toy(e, 3, 2, 16);
        const auto b = binding_energy_check(spec, kCfg);
        o.require(b.status == Status::pass, "binding e=" + fmt(e));
        if (e == 0.0) o.require(std::abs(b.slack) <= 1e-8, "equality at e=0");
        const auto m = assemble_pf_toy(spec);
        const auto gs = solve_ground(m, kCfg);
        const auto d = spatial_decay_check(m, gs, b.binding);
        o.require(d.status == Status::pass && d.c_exp - d.ratio > 0.0, "decay e=" + fmt(e));
        double comm = 0.0;
        for (Eigen::Index c = 0; c < gs.vectors.cols(); ++c)
            comm = std::max(comm, position_commutator_check(m, gs.vectors.col(c)).residual);
        comm = std::max(comm, position_commutator_check(m, spectral::random_unit_vector(m.dim(), 31)).residual);
        o.require(comm <= 1e-8, "commutator e=" + fmt(e));
        o.note("e=" + fmt(e) + " E_bin " + fmt(b.binding, 6) + " slack " + fmt(b.slack) + ", decay " + fmt(d.ratio) +
               " <= " + fmt(d.c_exp) + ", commutator " + fmt(comm));
    }
    return o;
}

Outcome reproducibility() {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "fockgs_acceptance";
    fs::create_directories(dir);
    const fs::path cfg = dir / "repro.ini";
    std::ofstream(cfg) << "[model]\nkind = spin-boson\nalpha = 0.1\ncutoff = 3\n"
                          "[grid]\nk_min = 0.2\nk_max = 2\nmodes = 3\n"
                          "[checks]\nenabled = number_identity, number_formula, pull_through, hs_invariance, overlap\n"
                          "[sweep]\nalpha = 0.2, 0.1\ncutoff = 2, 3\nthreads = 2\n";
    std::string runs[2];
    for (auto& text : runs) {
        std::ostringstream out, err;
        const int code = cli::run({"sweep", "--config", cfg.string(), "--seed", "4242"}, out, err);
        o.require(code == 0, "sweep exit code");
        text = out.str();
    }
    fs::remove_all(dir);
    o.require(!runs[0].empty() && runs[0] == runs[1], "bit-identical JSON-lines");
    o.note(std::to_string(std::count(runs[0].begin(), runs[0].end(), '\n')) + " records, " +
           std::to_string(runs[0].size()) + " bytes, identical: " + (runs[0] == runs[1] ? "yes" : "no"));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "exact identities", 5, exact_identities},
        {2, "displaced oscillator", 5, displaced_oscillator},
        {3, "pull-through convergence", 60, pull_through_convergence},
        {4, "multiplicity", 120, multiplicity_suite},
        {5, "overlap and delta(g)", 120, overlap_delta},
        {6, "resolvent convergence", 60, resolvent_convergence},
        {7, "massive number bound", 5, massive_bound},
        {8, "infrared dichotomy", 300, ir_dichotomy},
        {9, "Pauli-Fierz inequalities", 300, pf_inequalities},
        {10, "reproducibility", 60, reproducibility},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.limit;
        const bool ok = o.pass && in_time;
        if (!ok) ++failures;
        std::printf("%s criterion %d: %s [%.2f s / %.0f s%s] %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs, c.limit,
                    in_time ? "" : ", over time", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
