// spectral.hpp: ground eigenspace, shifted resolvents and operator norms
// for finite Hermitian operators.

#pragma once

#include "fockgs/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace fockgs::spectral {

struct SpectralConfig {
    int dense_threshold = 2000;
    double eigen_tolerance = 1e-10;  // relative residual
    double degeneracy_gap = 1e-8;    // relative to spectral scale
    int lanczos_max_iterations = 400;
    int lanczos_max_restarts = 50;
    std::uint64_t seed = 12345;
    double cg_tolerance = 1e-10;
    int cg_max_iterations = 20000;

    void validate() const;
};

struct GroundStateResult {
    double energy = 0.0;
    Matrix vectors;  // orthonormal columns spanning the near-ground cluster
    int multiplicity = 0;
    // Distance from the cluster to the next eigenvalue; +inf when the cluster
    // exhausts the space.
    double gap = 0.0;
    // Spread of the cluster eigenvalues (max - min).
    double cluster_width = 0.0;
    std::vector<double> residuals;
    // ‖P_top v‖² per vector; filled when a top-sector mask is supplied.
    std::vector<double> top_weights;
    double scale = 1.0;  // spectral scale used for relative thresholds
    bool dense = true;
};

// Lowest eigenvalue and every eigenvector within degeneracy_gap·scale of it.
// Dense below the threshold, deflated Lanczos with full reorthogonalization
// above. `top_mask` (0/1 per basis state) selects the truncation diagnostic.
GroundStateResult ground_eigenspace(const SparseMatrix& h, const SpectralConfig& cfg,
                                    const RealVector& top_mask = RealVector());

// All eigenvalues ascending; dimension must not exceed the dense threshold.
RealVector full_spectrum_small(const SparseMatrix& h, const SpectralConfig& cfg = {});

// Solver for (H - E + shift) x = rhs, reused across shifts.
class ShiftedResolvent {
public:
    ShiftedResolvent(const SparseMatrix& h, double energy, const SpectralConfig& cfg);

    Vector apply(double shift, const Vector& rhs) const;
    bool dense() const { return dense_; }

private:
    SparseMatrix h_;
    double energy_;
    SpectralConfig cfg_;
    bool dense_;
    RealVector evals_;
    Matrix evecs_;
};

// One-shot x = (H - E + shift)^{-1} rhs. Throws SolverError on CG breakdown
// or non-convergence and std::invalid_argument for shift <= 0.
Vector resolvent_apply(const SparseMatrix& h, double energy, double shift, const Vector& rhs,
                       const SpectralConfig& cfg = {});

// Conjugate gradient on an abstract Hermitian positive definite operator.
Vector conjugate_gradient(const std::function<Vector(const Vector&)>& apply, const Vector& rhs, double tolerance,
                          int max_iterations, double shift_for_message = 0.0);

// Largest singular value of a linear map given by its action and the action
// of its adjoint; power iteration on X^†X with relative accuracy 1e-6 or
// better.
double spectral_norm(const std::function<Vector(const Vector&)>& apply,
                     const std::function<Vector(const Vector&)>& apply_adjoint, Eigen::Index dim,
                     std::uint64_t seed = 7, int max_iterations = 5000);

// ‖X - Y‖ (largest singular value). Dense below the threshold.
double operator_norm_diff(const Matrix& x, const Matrix& y, const SpectralConfig& cfg = {});
double operator_norm_diff(const SparseMatrix& x, const SparseMatrix& y, const SpectralConfig& cfg = {});

// Spectral-norm of a dense matrix via Hermitian eigenvalues of X^†X.
double dense_spectral_norm(const Matrix& x);

// Deterministic complex Gaussian vector (unit norm) from a seeded engine.
Vector random_unit_vector(Eigen::Index dim, std::uint64_t seed);

}  // namespace fockgs::spectral
