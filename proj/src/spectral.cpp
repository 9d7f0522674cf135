#include "fockgs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace fockgs::spectral {

void SpectralConfig::validate() const {
    if (dense_threshold < 0) throw std::invalid_argument("dense_threshold must be non-negative");
    if (!(eigen_tolerance > 0.0) || !(degeneracy_gap > 0.0) || !(cg_tolerance > 0.0))
        throw std::invalid_argument("spectral tolerances must be positive");
    if (lanczos_max_iterations < 2 || cg_max_iterations < 1 || lanczos_max_restarts < 1)
        throw std::invalid_argument("iteration limits must be positive");
}

Vector random_unit_vector(Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v[i] = cplx(re, im);
    }
    return v / v.norm();
}

namespace {

using LinearMap = std::function<Vector(const Vector&)>;

struct RitzPair {
    double value = 0.0;
    Vector vector;
    double residual = std::numeric_limits<double>::infinity();
};

// Orthogonalize v against the columns of q (two passes of classical
// Gram-Schmidt).
void project_out(const Matrix& q, Eigen::Index cols, Vector& v) {
    if (cols == 0) return;
    for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(cols) * (q.leftCols(cols).adjoint() * v);
}

// Smallest eigenpair of a Hermitian map restricted to the orthogonal
// complement of `locked`, by Lanczos with full reorthogonalization and
// explicit restarts from the current Ritz vector.
RitzPair lanczos_lowest(const LinearMap& apply, Eigen::Index dim, const Matrix& locked, Vector start,
                        double abs_tol, int max_iterations, int max_restarts) {
    const Eigen::Index nlock = locked.cols();
    const Eigen::Index room = dim - nlock;
    if (room <= 0) throw std::logic_error("lanczos_lowest: no room left after deflation");
    const int krylov = static_cast<int>(std::min<Eigen::Index>(max_iterations, room));

    RitzPair best;
    for (int restart = 0; restart < max_restarts; ++restart) {
        project_out(locked, nlock, start);
        double nrm = start.norm();
        if (nrm == 0.0) throw std::logic_error("lanczos_lowest: start vector lies in the locked space");
        Matrix q(dim, krylov);
        q.col(0) = start / nrm;
        std::vector<double> alpha;
        std::vector<double> beta;
        int steps = 0;
        RealVector ritz_coeff;
        double resid = std::numeric_limits<double>::infinity();
        for (int j = 0; j < krylov; ++j) {
            Vector w = apply(q.col(j));
            const double a = std::real(q.col(j).dot(w));
            alpha.push_back(a);
            ++steps;
            project_out(locked, nlock, w);
            project_out(q, j + 1, w);
            const double b = w.norm();
            // Check convergence every few steps and at the end.
            const bool last = (j + 1 == krylov);
            const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(a));
            if (breakdown || last || (j % 5 == 4)) {
                Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
                for (int i = 0; i < steps; ++i) {
                    t(i, i) = alpha[static_cast<std::size_t>(i)];
                    if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
                ritz_coeff = es.eigenvectors().col(0);
                resid = breakdown ? 0.0 : b * std::abs(ritz_coeff[steps - 1]);
                if (resid <= 0.1 * abs_tol || breakdown) break;
            }
            if (last) break;
            beta.push_back(b);
            q.col(j + 1) = w / b;
        }
        Vector v = q.leftCols(steps) * ritz_coeff.cast<cplx>();
        project_out(locked, nlock, v);
        v.normalize();
        const Vector hv = apply(v);
        const double rq = std::real(v.dot(hv));
        Vector r = hv - rq * v;
        project_out(locked, nlock, r);
        best = {rq, v, r.norm()};
        if (best.residual <= abs_tol) return best;
        start = v;
    }
    std::ostringstream os;
    os << "Lanczos did not converge: attained residual " << best.residual << " (target " << abs_tol << ")";
    throw SolverError(os.str(), best.residual);
}

// Upper bound on the spectral radius: maximum absolute column sum.
double gershgorin_scale(const SparseMatrix& h) {
    double m = 0.0;
    for (int k = 0; k < h.outerSize(); ++k) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) s += std::abs(it.value());
        m = std::max(m, s);
    }
    return m;
}

void fill_diagnostics(const SparseMatrix& h, const RealVector& top_mask, GroundStateResult& r) {
    r.residuals.clear();
    r.top_weights.clear();
    for (Eigen::Index c = 0; c < r.vectors.cols(); ++c) {
        const Vector v = r.vectors.col(c);
        r.residuals.push_back((h * v - r.energy * v).norm());
        if (top_mask.size() == v.size()) r.top_weights.push_back(top_mask.cwiseProduct(v.cwiseAbs2()).sum());
    }
}

}  // namespace

GroundStateResult ground_eigenspace(const SparseMatrix& h, const SpectralConfig& cfg, const RealVector& top_mask) {
    cfg.validate();
    if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("ground_eigenspace: H must be square");
    if (!is_hermitian(h)) throw std::invalid_argument("ground_eigenspace: H must be Hermitian");
    const Eigen::Index dim = h.rows();
    GroundStateResult r;

    if (dim <= cfg.dense_threshold) {
        Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(h)};
        if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0.0);
        const RealVector& ev = es.eigenvalues();
        r.dense = true;
        r.scale = std::max({1.0, std::abs(ev[0]), std::abs(ev[dim - 1])});
        r.energy = ev[0];
        const double thr = cfg.degeneracy_gap * r.scale;
        Eigen::Index m = 1;
        while (m < dim && ev[m] - ev[0] <= thr) ++m;
        r.multiplicity = static_cast<int>(m);
        r.vectors = es.eigenvectors().leftCols(m);
        r.cluster_width = ev[m - 1] - ev[0];
        r.gap = (m < dim) ? ev[m] - ev[0] : std::numeric_limits<double>::infinity();
        fill_diagnostics(h, top_mask, r);
        return r;
    }

    r.dense = false;
    r.scale = std::max(1.0, gershgorin_scale(h));
    const double abs_tol = cfg.eigen_tolerance * r.scale;
    const double thr = cfg.degeneracy_gap * r.scale;
    const LinearMap apply = [&h](const Vector& x) -> Vector { return h * x; };

    Matrix locked(dim, 0);
    std::vector<double> values;
    std::uint64_t seed = cfg.seed;
    double next = std::numeric_limits<double>::infinity();
    while (locked.cols() < dim) {
        RitzPair p = lanczos_lowest(apply, dim, locked, random_unit_vector(dim, seed++), abs_tol,
                                    cfg.lanczos_max_iterations, cfg.lanczos_max_restarts);
        Matrix cand(dim, locked.cols() + 1);
        cand << locked, p.vector;
        // Rayleigh-Ritz on the accumulated subspace keeps the cluster
        // consistent if a later pass finds a lower value.
        const Matrix hq = cand.adjoint() * (h * cand);
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hq + hq.adjoint()));
        const RealVector& ev = es.eigenvalues();
        const Matrix rot = cand * es.eigenvectors();
        Eigen::Index m = 1;
        while (m < ev.size() && ev[m] - ev[0] <= thr) ++m;
        if (m == ev.size()) {
            locked = rot;
            values.assign(ev.data(), ev.data() + ev.size());
            continue;
        }
        locked = rot.leftCols(m);
        values.assign(ev.data(), ev.data() + m);
        next = ev[m];
        break;
    }
    r.energy = values.front();
    r.multiplicity = static_cast<int>(locked.cols());
    r.vectors = locked;
    r.cluster_width = values.back() - values.front();
    r.gap = next - r.energy;
    fill_diagnostics(h, top_mask, r);
    for (double res : r.residuals) {
        if (res > 10.0 * abs_tol) {
            std::ostringstream os;
            os << "ground_eigenspace: cluster vector residual " << res << " above tolerance " << abs_tol;
            throw SolverError(os.str(), res);
        }
    }
    return r;
}

RealVector full_spectrum_small(const SparseMatrix& h, const SpectralConfig& cfg) {
    if (h.rows() > cfg.dense_threshold) throw std::invalid_argument("full_spectrum_small: dimension above dense threshold");
    if (!is_hermitian(h)) throw std::invalid_argument("full_spectrum_small: H must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

Vector conjugate_gradient(const LinearMap& apply, const Vector& rhs, double tolerance, int max_iterations,
                          double shift_for_message) {
    const double bnorm = rhs.norm();
    Vector x = Vector::Zero(rhs.size());
    if (bnorm == 0.0) return x;
    Vector r = rhs;
    Vector p = r;
    double rr = r.squaredNorm();
    for (int it = 0; it < max_iterations; ++it) {
        const Vector ap = apply(p);
        const double pap = std::real(p.dot(ap));
        if (!(pap > 0.0)) {
            std::ostringstream os;
            os << "conjugate_gradient: operator not positive definite at shift " << shift_for_message;
            throw SolverError(os.str(), std::sqrt(rr) / bnorm);
        }
        const double step = rr / pap;
        x += step * p;
        r -= step * ap;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tolerance * bnorm) {
            // Confirm against the true residual.
            const double true_res = (rhs - apply(x)).norm();
            if (true_res <= tolerance * bnorm) return x;
            r = rhs - apply(x);
            p = r;
            rr = r.squaredNorm();
            continue;
        }
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    std::ostringstream os;
    os << "conjugate_gradient: no convergence at shift " << shift_for_message;
    throw SolverError(os.str(), std::sqrt(rr) / bnorm);
}

ShiftedResolvent::ShiftedResolvent(const SparseMatrix& h, double energy, const SpectralConfig& cfg)
    : h_(h), energy_(energy), cfg_(cfg), dense_(h.rows() <= cfg.dense_threshold) {
    if (h.rows() != h.cols()) throw std::invalid_argument("ShiftedResolvent: H must be square");
    if (dense_) {
        Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(h)};
        if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0.0);
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }
}

Vector ShiftedResolvent::apply(double shift, const Vector& rhs) const {
    if (!(shift > 0.0)) throw std::invalid_argument("resolvent_apply: shift must be positive");
    if (rhs.size() != h_.rows()) throw std::invalid_argument("resolvent_apply: rhs dimension mismatch");
    if (dense_) {
        const double lowest = evals_[0] - energy_ + shift;
        if (!(lowest > 0.0)) {
            std::ostringstream os;
            os << "resolvent_apply: H - E + shift is not positive definite at shift " << shift;
            throw SolverError(os.str(), lowest);
        }
        Vector c = evecs_.adjoint() * rhs;
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] /= (evals_[i] - energy_ + shift);
        return evecs_ * c;
    }
    const double diag = shift - energy_;
    const LinearMap op = [this, diag](const Vector& x) -> Vector { return h_ * x + diag * x; };
    return conjugate_gradient(op, rhs, cfg_.cg_tolerance, cfg_.cg_max_iterations, shift);
}

Vector resolvent_apply(const SparseMatrix& h, double energy, double shift, const Vector& rhs,
                       const SpectralConfig& cfg) {
    if (!(shift > 0.0)) throw std::invalid_argument("resolvent_apply: shift must be positive");
    if (h.rows() <= cfg.dense_threshold) {
        Matrix a = Matrix(h);
        a.diagonal().array() += cplx(shift - energy);
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() != Eigen::Success) {
            std::ostringstream os;
            os << "resolvent_apply: H - E + shift is not positive definite at shift " << shift;
            throw SolverError(os.str(), 0.0);
        }
        return llt.solve(rhs);
    }
    return ShiftedResolvent(h, energy, cfg).apply(shift, rhs);
}

double spectral_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index dim, std::uint64_t seed,
                     int max_iterations) {
    if (dim == 0) return 0.0;
    // Lowest eigenvalue of -X^†X is minus the largest squared singular value.
    const LinearMap neg_gram = [&](const Vector& v) -> Vector { return -apply_adjoint(apply(v)); };
    Vector start = random_unit_vector(dim, seed);
    if (apply(start).norm() == 0.0) {
        // Either X = 0 or an unlucky start; one more probe settles it.
        start = random_unit_vector(dim, seed + 1);
        if (apply(start).norm() == 0.0) {
            double probe = 0.0;
            for (Eigen::Index i = 0; i < std::min<Eigen::Index>(dim, 4); ++i) {
                Vector e = Vector::Zero(dim);
                e[i] = 1.0;
                probe = std::max(probe, apply(e).norm());
            }
            if (probe == 0.0) return 0.0;
        }
    }
    // Scale estimate from a couple of power steps.
    Vector v = start;
    double est = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vector w = apply_adjoint(apply(v));
        est = w.norm();
        if (est == 0.0) break;
        v = w / est;
    }
    const double tol = 1e-9 * std::max(est, 1e-300);
    const Matrix none(dim, 0);
    const int krylov = static_cast<int>(std::min<Eigen::Index>(dim, 120));
    RitzPair p = lanczos_lowest(neg_gram, dim, none, start, tol, krylov, std::max(1, max_iterations / krylov));
    return std::sqrt(std::max(0.0, -p.value));
}

double dense_spectral_norm(const Matrix& x) {
    if (x.size() == 0) return 0.0;
    const Matrix gram = x.adjoint() * x;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.adjoint()), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double operator_norm_diff(const Matrix& x, const Matrix& y, const SpectralConfig& cfg) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("operator_norm_diff: shape mismatch");
    const Matrix d = x - y;
    if (std::max(d.rows(), d.cols()) <= cfg.dense_threshold) {
        Eigen::BDCSVD<Matrix> svd(d);
        return d.size() == 0 ? 0.0 : svd.singularValues()[0];
    }
    const LinearMap a = [&d](const Vector& v) -> Vector { return d * v; };
    const LinearMap at = [&d](const Vector& v) -> Vector { return d.adjoint() * v; };
    return spectral_norm(a, at, d.cols(), cfg.seed);
}

double operator_norm_diff(const SparseMatrix& x, const SparseMatrix& y, const SpectralConfig& cfg) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("operator_norm_diff: shape mismatch");
    const SparseMatrix d = x - y;
    if (std::max(d.rows(), d.cols()) <= cfg.dense_threshold) return operator_norm_diff(Matrix(d), Matrix::Zero(d.rows(), d.cols()), cfg);
    const SparseMatrix dt = d.adjoint();
    const LinearMap a = [&d](const Vector& v) -> Vector { return d * v; };
    const LinearMap at = [&dt](const Vector& v) -> Vector { return dt * v; };
    return spectral_norm(a, at, d.cols(), cfg.seed);
}

}  // namespace fockgs::spectral
