// types.hpp: scalar, vector and matrix aliases shared by every module.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace fockgs {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr cplx kI{0.0, 1.0};

// Requested Hilbert space exceeds the configured dimension cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver stopped before reaching its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double attained)
        : std::runtime_error(what), attained_(attained) {}
    double attained() const noexcept { return attained_; }

private:
    double attained_;
};

// Largest |x_ij| over stored entries.
inline double max_abs(const SparseMatrix& x) {
    double m = 0.0;
    for (int k = 0; k < x.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(x, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

inline bool is_hermitian(const SparseMatrix& x, double rel_tol = 1e-12) {
    const SparseMatrix diff = x - SparseMatrix(x.adjoint());
    return max_abs(diff) <= rel_tol * std::max(1.0, max_abs(x));
}

inline bool is_hermitian(const Matrix& x, double rel_tol = 1e-12) {
    if (x.rows() != x.cols()) return false;
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    return (x - x.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace fockgs
