// fock.hpp: truncated bosonic Fock space over a finite set of modes.
//
// States are occupation vectors (n_1, ..., n_M) with total number
// n_1 + ... + n_M <= N_max. The basis is ordered total-number-major and
// lexicographically ascending inside each sector, so the vacuum sits at
// index 0 and every sector occupies a contiguous block.

#pragma once

#include "fockgs/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace fockgs::fock {

inline constexpr std::size_t kDefaultDimensionCap = 5'000'000;

// Discretized one-particle space: mode momenta, quadrature weights and
// dispersion. Built by model::dispersion_grid.
struct ModeGrid {
    RealVector k;        // strictly increasing
    RealVector weights;  // > 0
    RealVector omega;    // > 0
    double mass = 0.0;
    double k_min = 0.0;
    double k_max = 0.0;

    int size() const { return static_cast<int>(k.size()); }
    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

class OccupationBasis {
public:
    OccupationBasis(int modes, int cutoff, std::size_t dimension_cap = kDefaultDimensionCap);

    int modes() const { return modes_; }
    int cutoff() const { return cutoff_; }
    std::size_t dim() const { return dim_; }

    std::span<const std::uint16_t> state(std::size_t index) const {
        return {occupations_.data() + index * static_cast<std::size_t>(modes_),
                static_cast<std::size_t>(modes_)};
    }
    int total(std::size_t index) const { return totals_[index]; }

    // Position of an occupation vector; throws std::out_of_range if it is not
    // in the truncated space.
    std::size_t index_of(std::span<const int> occupation) const;
    // Same, without validation. The vector must belong to the basis.
    std::size_t rank(std::span<const int> occupation) const;

    // First index of sector n; sector_offset(cutoff()+1) == dim().
    std::size_t sector_offset(int n) const { return sector_offsets_[static_cast<std::size_t>(n)]; }
    std::size_t sector_size(int n) const { return sector_offset(n + 1) - sector_offset(n); }

    // C(modes + cutoff, cutoff) without overflow checks beyond the cap.
    static std::size_t count_states(int modes, int cutoff);

private:
    // Number of ways to distribute `quanta` over `parts` modes.
    std::size_t compositions(int quanta, int parts) const;

    int modes_;
    int cutoff_;
    std::size_t dim_;
    std::vector<std::uint16_t> occupations_;
    std::vector<int> totals_;
    std::vector<std::size_t> sector_offsets_;
    std::vector<std::vector<std::size_t>> binom_;  // binom_[a][b] = C(a, b)
};

using BasisPtr = std::shared_ptr<const OccupationBasis>;

struct FockOperator {
    BasisPtr basis;
    SparseMatrix matrix;
    bool hermitian = false;
};

struct FockVector {
    BasisPtr basis;
    Vector coeffs;

    // Component Ψ^(n) as a view into coeffs.
    auto sector(int n) const {
        return coeffs.segment(static_cast<Eigen::Index>(basis->sector_offset(n)),
                              static_cast<Eigen::Index>(basis->sector_size(n)));
    }
};

enum class Ladder { lower, raise };

BasisPtr build_basis(int modes, int cutoff, std::size_t dimension_cap = kDefaultDimensionCap);

// a_m (lower) or P a_m^† P (raise); raise annihilates the top sector.
FockOperator ladder_op(const BasisPtr& basis, int mode, Ladder kind);

// dΓ(S) = Σ_ij S_ij a_i^† a_j for a Hermitian one-particle matrix S.
FockOperator second_quantization(const BasisPtr& basis, const Matrix& one_particle);
FockOperator second_quantization(const BasisPtr& basis, const RealVector& diagonal);

FockOperator number_operator(const BasisPtr& basis);

// φ(λ) = (a^†(λ̄) + a(λ))/√2 = Σ_m (λ̄_m a_m^† + λ_m a_m)/√2.
FockOperator field_operator(const BasisPtr& basis, const Vector& lambda);

// Diagonal 0/1 mask selecting the states whose total number is >= min_total.
RealVector sector_mask(const OccupationBasis& basis, int min_total);

}  // namespace fockgs::fock
