#include "fockgs/model.hpp"

#include "fockgs/spectral.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fockgs::model {

using fock::Ladder;

ModeGrid dispersion_grid(Dispersion kind, double k_min, double k_max, int modes, Quadrature quadrature) {
    if (!(k_min >= 0.0) || !(k_max > k_min)) throw std::invalid_argument("dispersion_grid: need 0 <= k_min < k_max");
    if (quadrature == Quadrature::log_midpoint && !(k_min > 0.0))
        throw std::invalid_argument("dispersion_grid: logarithmic cells need k_min > 0");
    if (modes < 1) throw std::invalid_argument("dispersion_grid: need at least one mode");
    if (kind.mass < 0.0) throw std::invalid_argument("dispersion_grid: mass must be non-negative");
    ModeGrid g;
    g.k.resize(modes);
    g.weights.resize(modes);
    g.omega.resize(modes);
    g.mass = kind.mass;
    g.k_min = k_min;
    g.k_max = k_max;
    for (int m = 0; m < modes; ++m) {
        double lo = 0.0;
        double hi = 0.0;
        if (quadrature == Quadrature::uniform_midpoint) {
            const double w = (k_max - k_min) / modes;
            lo = k_min + m * w;
            hi = lo + w;
            g.k[m] = 0.5 * (lo + hi);
        } else {
            const double r = std::log(k_max / k_min) / modes;
            lo = k_min * std::exp(m * r);
            hi = k_min * std::exp((m + 1) * r);
            g.k[m] = std::sqrt(lo * hi);
        }
        g.weights[m] = hi - lo;
        g.omega[m] = std::sqrt(g.k[m] * g.k[m] + kind.mass * kind.mass);
    }
    g.validate();
    return g;
}

Vector form_factor_preset(const ModeGrid& grid, double beta, const std::function<double(double)>& window) {
    grid.validate();
    Vector lambda(grid.size());
    for (int m = 0; m < grid.size(); ++m)
        lambda[m] = std::pow(grid.omega[m], beta) * window(grid.k[m]) * std::sqrt(grid.weights[m]);
    return lambda;
}

void GsbSpec::validate() const {
    if (a.rows() == 0 || a.rows() != a.cols()) throw std::invalid_argument("GsbSpec: A must be square and non-empty");
    if (!is_hermitian(a)) throw std::invalid_argument("GsbSpec: A must be Hermitian");
    if (couplings.empty()) throw std::invalid_argument("GsbSpec: at least one coupling term required");
    grid.validate();
    for (const auto& c : couplings) {
        if (c.b.rows() != a.rows() || c.b.cols() != a.cols()) throw std::invalid_argument("GsbSpec: B_j shape mismatch");
        if (!is_hermitian(c.b)) throw std::invalid_argument("GsbSpec: B_j must be Hermitian");
        if (c.lambda.size() != grid.size()) throw std::invalid_argument("GsbSpec: λ_j length must equal mode count");
        if (!c.lambda.allFinite()) throw std::invalid_argument("GsbSpec: λ_j must be finite");
    }
    if (!std::isfinite(alpha)) throw std::invalid_argument("GsbSpec: α must be finite");
    if (cutoff < 0) throw std::invalid_argument("GsbSpec: N_max must be non-negative");
}

GsbSpec spin_boson_preset(double epsilon, double delta, const ModeGrid& grid, double beta, double alpha, int cutoff) {
    Matrix sz(2, 2), sx(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    sx << 0.0, 1.0, 1.0, 0.0;
    GsbSpec s;
    s.a = 0.5 * epsilon * sz + 0.5 * delta * sx;
    s.couplings.push_back({sz, form_factor_preset(grid, beta)});
    s.alpha = alpha;
    s.grid = grid;
    s.cutoff = cutoff;
    return s;
}

void PfToySpec::validate() const {
    if (sites < 4) throw std::invalid_argument("PfToySpec: N_x must be >= 4");
    if (!(length > 0.0)) throw std::invalid_argument("PfToySpec: box length must be positive");
    if (!(electron_mass > 0.0)) throw std::invalid_argument("PfToySpec: electron mass must be positive");
    if (!std::isfinite(charge)) throw std::invalid_argument("PfToySpec: charge must be finite");
    if (static_cast<int>(potential.size()) != sites) throw std::invalid_argument("PfToySpec: potential needs N_x samples");
    for (double v : potential)
        if (!std::isfinite(v)) throw std::invalid_argument("PfToySpec: potential must be finite");
    grid.validate();
    if (static_cast<int>(uv_cutoff.size()) != grid.size()) throw std::invalid_argument("PfToySpec: φ̂ needs M samples");
    for (int m = 0; m < grid.size(); ++m) {
        const double f = uv_cutoff[static_cast<std::size_t>(m)];
        const double w = grid.omega[m];
        if (!std::isfinite(f)) throw std::invalid_argument("PfToySpec: φ̂ must be finite");
        if (std::abs(f) / w > 1e12 || !std::isfinite(f / std::sqrt(w)) || !std::isfinite(f * std::sqrt(w)))
            throw std::invalid_argument("PfToySpec: φ̂/ω overflows near k_min");
    }
    if (cutoff < 0) throw std::invalid_argument("PfToySpec: N_max must be non-negative");
}

std::vector<double> square_well(const PfToySpec& spec, double depth, double half_width) {
    std::vector<double> v(static_cast<std::size_t>(spec.sites), 0.0);
    for (int i = 0; i < spec.sites; ++i)
        if (std::abs(spec.position(i)) < half_width) v[static_cast<std::size_t>(i)] = -depth;
    return v;
}

SparseMatrix lift_atom(const Matrix& op, Eigen::Index fock_dim) {
    SparseMatrix id(fock_dim, fock_dim);
    id.setIdentity();
    const SparseMatrix s = op.sparseView(0.0, 0.0);
    SparseMatrix out = Eigen::kroneckerProduct(s, id);
    out.makeCompressed();
    return out;
}

SparseMatrix lift_fock(const SparseMatrix& op, int atom_dim) {
    SparseMatrix id(atom_dim, atom_dim);
    id.setIdentity();
    SparseMatrix out = Eigen::kroneckerProduct(id, op);
    out.makeCompressed();
    return out;
}

RealVector AssembledModel::sector_mask(int min_total) const {
    const RealVector f = fock::sector_mask(*basis, min_total);
    return f.replicate(atom_dim, 1);
}

RealVector AssembledModel::vacuum_mask() const {
    RealVector f = RealVector::Zero(fock_dim());
    f[0] = 1.0;
    return f.replicate(atom_dim, 1);
}

Vector AssembledModel::apply_h0_function(const std::function<double(double)>& f, const Vector& v) const {
    const Eigen::Index nf = fock_dim();
    if (v.size() != nf * atom_dim) throw std::invalid_argument("apply_h0_function: dimension mismatch");
    Vector out(v.size());
    Eigen::Map<const Matrix> in(v.data(), nf, atom_dim);
    Matrix w = in * atom_modes.conjugate();
    for (Eigen::Index a = 0; a < atom_dim; ++a)
        for (Eigen::Index j = 0; j < nf; ++j) w(j, a) *= f(atom_levels[a] + field_energies[j] - atom_energy);
    Eigen::Map<Matrix>(out.data(), nf, atom_dim) = w * atom_modes.transpose();
    return out;
}

namespace {

struct AtomSpectrum {
    RealVector levels;
    Matrix modes;
    double energy;
    int multiplicity;
    double gap;
    Matrix projector;
};

AtomSpectrum analyze_atom(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
    AtomSpectrum s;
    s.levels = es.eigenvalues();
    s.modes = es.eigenvectors();
    s.energy = s.levels[0];
    const double scale = std::max(1.0, s.levels.cwiseAbs().maxCoeff());
    const double thr = 1e-10 * scale;
    Eigen::Index m = 1;
    while (m < s.levels.size() && s.levels[m] - s.levels[0] <= thr) ++m;
    s.multiplicity = static_cast<int>(m);
    s.gap = m < s.levels.size() ? s.levels[m] - s.levels[0] : std::numeric_limits<double>::infinity();
    s.projector = s.modes.leftCols(m) * s.modes.leftCols(m).adjoint();
    return s;
}

void fill_common(AssembledModel& out, const Matrix& atom_h, const ModeGrid& grid, int cutoff, std::size_t cap) {
    const auto nmodes = grid.size();
    const std::size_t fdim = fock::OccupationBasis::count_states(nmodes, cutoff);
    const auto adim = static_cast<std::size_t>(atom_h.rows());
    if (fdim > cap || adim * fdim > cap) {
        std::ostringstream os;
        os << "model dimension " << adim << " x " << fdim << " exceeds cap " << cap;
        throw CapacityError(os.str());
    }
    out.basis = fock::build_basis(nmodes, cutoff, cap);
    out.grid = grid;
    out.atom_dim = static_cast<int>(atom_h.rows());
    out.atom_hamiltonian = atom_h;
    const AtomSpectrum spec = analyze_atom(atom_h);
    out.atom_levels = spec.levels;
    out.atom_modes = spec.modes;
    out.atom_energy = spec.energy;
    out.atom_multiplicity = spec.multiplicity;
    out.atom_gap = spec.gap;
    out.atom_ground_projector = spec.projector;

    const fock::FockOperator hf = fock::second_quantization(out.basis, grid.omega);
    out.field_energies = Matrix(hf.matrix).diagonal().real();
    out.free_field = lift_fock(hf.matrix, out.atom_dim);
    out.number = lift_fock(fock::number_operator(out.basis).matrix, out.atom_dim);
    out.lower.clear();
    for (int m = 0; m < nmodes; ++m)
        out.lower.push_back(lift_fock(fock::ladder_op(out.basis, m, Ladder::lower).matrix, out.atom_dim));
    out.h0 = lift_atom(atom_h, out.fock_dim()) + out.free_field;
    out.h0.makeCompressed();
}

}  // namespace

AssembledModel assemble_gsb(const GsbSpec& spec) {
    spec.validate();
    AssembledModel out;
    out.kind = AssembledModel::Kind::gsb;
    {
        std::ostringstream os;
        os << "gsb(n=" << spec.a.rows() << ", J=" << spec.couplings.size() << ", M=" << spec.grid.size()
           << ", N_max=" << spec.cutoff << ", alpha=" << spec.alpha << ")";
        out.source = os.str();
    }
    fill_common(out, spec.a, spec.grid, spec.cutoff, spec.dimension_cap);

    const Eigen::Index nf = out.fock_dim();
    out.hi = SparseMatrix(out.atom_dim * nf, out.atom_dim * nf);
    for (const auto& c : spec.couplings) {
        const SparseMatrix phi = fock::field_operator(out.basis, c.lambda).matrix;
        out.hi += SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(c.b.sparseView(0.0, 0.0)), phi));
    }
    out.hi.makeCompressed();
    out.g = spec.alpha;
    out.h = out.h0 + out.g * out.hi;
    out.h.makeCompressed();
    out.interaction_reach = 1;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < spec.grid.size(); ++m) {
        Matrix atom_part = Matrix::Zero(out.atom_dim, out.atom_dim);
        for (const auto& c : spec.couplings) atom_part += (std::conj(c.lambda[m]) * inv_sqrt2) * c.b;
        out.t.push_back(lift_atom(atom_part, nf));
    }
    return out;
}

Matrix electron_hamiltonian(const PfToySpec& spec) {
    const int n = spec.sites;
    const double h = spec.spacing();
    const double hop = 1.0 / (2.0 * spec.electron_mass * h * h);
    Matrix hp = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        hp(i, i) += 2.0 * hop + spec.potential[static_cast<std::size_t>(i)];
        hp(i, j) -= hop;
        hp(j, i) -= hop;
    }
    return hp;
}

Matrix central_momentum(const PfToySpec& spec) {
    const int n = spec.sites;
    const double h = spec.spacing();
    Matrix p = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        p(i, (i + 1) % n) += -kI / (2.0 * h);
        p(i, (i - 1 + n) % n) += kI / (2.0 * h);
    }
    return p;
}

AssembledModel assemble_pf_toy(const PfToySpec& spec) {
    spec.validate();
    const int n = spec.sites;
    const double h = spec.spacing();
    const double mass = spec.electron_mass;
    const double e = spec.charge;

    AssembledModel out;
    out.kind = AssembledModel::Kind::pf_toy;
    {
        std::ostringstream os;
        os << "pf_toy(N_x=" << n << ", L=" << spec.length << ", M=" << spec.grid.size() << ", N_max=" << spec.cutoff
           << ", e=" << e << ")";
        out.source = os.str();
    }
    const Matrix hp = electron_hamiltonian(spec);
    Matrix atom_h = Eigen::kroneckerProduct(hp, Matrix::Identity(2, 2)).eval();
    fill_common(out, atom_h, spec.grid, spec.cutoff, spec.dimension_cap);
    out.pf = spec;

    const auto nf = out.fock_dim();
    const int modes = spec.grid.size();
    std::vector<SparseMatrix> raise, lower;
    for (int m = 0; m < modes; ++m) {
        raise.push_back(fock::ladder_op(out.basis, m, Ladder::raise).matrix);
        lower.push_back(fock::ladder_op(out.basis, m, Ladder::lower).matrix);
    }
    // Coupling per mode with the quadrature weight folded in.
    std::vector<double> coef(static_cast<std::size_t>(modes));
    for (int m = 0; m < modes; ++m)
        coef[static_cast<std::size_t>(m)] =
            spec.uv_cutoff[static_cast<std::size_t>(m)] * std::sqrt(spec.grid.weights[m] / (2.0 * spec.grid.omega[m]));

    // Fields at link midpoints x_i + h/2, link i joining sites i and i+1 (mod N_x).
    auto field_a = [&](double x) {
        SparseMatrix a(nf, nf);
        for (int m = 0; m < modes; ++m) {
            const cplx ph = std::exp(-kI * spec.grid.k[m] * x);
            a += (coef[static_cast<std::size_t>(m)] * ph) * raise[static_cast<std::size_t>(m)] +
                 (coef[static_cast<std::size_t>(m)] * std::conj(ph)) * lower[static_cast<std::size_t>(m)];
        }
        return a;
    };
    // Scalar magnetic field: the curl factor -ik×e(k,j) becomes -i·k.
    auto field_b = [&](double x) {
        SparseMatrix b(nf, nf);
        for (int m = 0; m < modes; ++m) {
            const double km = spec.grid.k[m];
            const cplx ph = std::exp(-kI * km * x);
            b += (coef[static_cast<std::size_t>(m)] * km * (-kI) * ph) * raise[static_cast<std::size_t>(m)] +
                 (coef[static_cast<std::size_t>(m)] * km * kI * std::conj(ph)) * lower[static_cast<std::size_t>(m)];
        }
        return b;
    };
    std::vector<SparseMatrix> link_a, link_b;
    for (int i = 0; i < n; ++i) {
        const double xm = spec.position(i) + 0.5 * h;
        link_a.push_back(field_a(xm));
        link_b.push_back(field_b(xm));
    }

    auto site_op = [n](int i, int j) {
        SparseMatrix s(n, n);
        s.insert(i, j) = 1.0;
        return s;
    };
    SparseMatrix id2(2, 2);
    id2.setIdentity();
    SparseMatrix sz(2, 2);
    sz.insert(0, 0) = 1.0;
    sz.insert(1, 1) = -1.0;
    auto embed = [&](const SparseMatrix& site, const SparseMatrix& spin, const SparseMatrix& fockop) {
        SparseMatrix left = Eigen::kroneckerProduct(site, spin);
        SparseMatrix full = Eigen::kroneckerProduct(left, fockop);
        return full;
    };

    const Eigen::Index dim = 2 * n * nf;
    SparseMatrix cross(dim, dim);  // discretization of pA + Ap
    SparseMatrix dia(dim, dim);    // A² averaged over the two links at each site
    SparseMatrix spin(dim, dim);   // σ_z ⊗ B̄
    SparseMatrix abar(dim, dim);   // Σ_links A_ℓ (L_ℓ + L_ℓ^†)/2
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        const SparseMatrix hop = site_op(j, i);  // |i+1⟩⟨i|
        const SparseMatrix hop_t = site_op(i, j);
        const SparseMatrix& al = link_a[static_cast<std::size_t>(i)];
        cross += embed(hop, id2, (kI / h) * al) + embed(hop_t, id2, (-kI / h) * al);
        abar += embed(hop, id2, 0.5 * al) + embed(hop_t, id2, 0.5 * al);

        const int prev = (i - 1 + n) % n;
        const SparseMatrix& a_left = link_a[static_cast<std::size_t>(prev)];
        const SparseMatrix& a_right = link_a[static_cast<std::size_t>(i)];
        const SparseMatrix a2 = 0.5 * (SparseMatrix(a_left * a_left) + SparseMatrix(a_right * a_right));
        dia += embed(site_op(i, i), id2, a2);
        const SparseMatrix bbar = 0.5 * (link_b[static_cast<std::size_t>(prev)] + link_b[static_cast<std::size_t>(i)]);
        spin += embed(site_op(i, i), sz, bbar);
    }

    // H = H₀ + e·H_I with H_I = -(pA+Ap)/2m - σ_z B̄/2m + e·A²/2m.
    out.hi = (-1.0 / (2.0 * mass)) * cross + (-1.0 / (2.0 * mass)) * spin + (e / (2.0 * mass)) * dia;
    out.hi.makeCompressed();
    out.g = e;
    out.h = out.h0 + out.g * out.hi;
    out.h.makeCompressed();
    out.interaction_reach = (e != 0.0) ? 2 : 1;

    // T_m = [a_m, H_I] from truncated matrices, kept only on columns whose
    // Fock sector lies at least `reach` below the cutoff, where truncation
    // does not enter.
    const RealVector keep = out.sector_mask(0) - out.sector_mask(spec.cutoff - out.interaction_reach + 1);
    SparseMatrix keep_cols(dim, dim);
    {
        std::vector<Triplet> t;
        for (Eigen::Index i = 0; i < dim; ++i)
            if (keep[i] != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        keep_cols.setFromTriplets(t.begin(), t.end());
    }
    for (int m = 0; m < modes; ++m) {
        const SparseMatrix& am = out.lower[static_cast<std::size_t>(m)];
        SparseMatrix comm = SparseMatrix(am * out.hi) - SparseMatrix(out.hi * am);
        SparseMatrix tm = comm * keep_cols;
        tm.prune(cplx(0.0), 0.0);
        out.t.push_back(tm);
    }

    AssembledModel::PfOperators ops;
    ops.electron_hamiltonian = hp;
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) x(i, i) = spec.position(i);
    const Matrix x2 = Eigen::kroneckerProduct(x, Matrix::Identity(2, 2)).eval();
    const Matrix p2 = Eigen::kroneckerProduct(central_momentum(spec), Matrix::Identity(2, 2)).eval();
    ops.position = lift_atom(x2, nf);
    ops.momentum = lift_atom(p2, nf);
    ops.link_field = abar;
    ops.interior = RealVector::Ones(dim);
    for (int s = 0; s < 2; ++s) {
        ops.interior.segment((0 * 2 + s) * nf, nf).setZero();
        ops.interior.segment(((n - 1) * 2 + s) * nf, nf).setZero();
    }
    out.pf_ops = std::move(ops);
    return out;
}

double relative_bound(const AssembledModel& model, int dense_threshold) {
    const Eigen::Index dim = model.dim();
    auto resolve = [&model](const Vector& v) { return model.apply_h0_function([](double x) { return 1.0 / (x + 1.0); }, v); };
    if (dim <= dense_threshold) {
        Matrix r(dim, dim);
        for (Eigen::Index c = 0; c < dim; ++c) {
            Vector e = Vector::Zero(dim);
            e[c] = 1.0;
            r.col(c) = resolve(e);
        }
        return spectral::dense_spectral_norm(model.hi * r);
    }
    const auto apply = [&](const Vector& v) -> Vector { return model.hi * resolve(v); };
    const auto apply_adj = [&](const Vector& v) -> Vector { return resolve(Vector(model.hi * v)); };
    return spectral::spectral_norm(apply, apply_adj, dim);
}

}  // namespace fockgs::model
