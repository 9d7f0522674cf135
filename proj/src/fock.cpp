#include "fockgs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fockgs::fock {

void ModeGrid::validate() const {
    const auto m = k.size();
    if (m < 1) throw std::invalid_argument("ModeGrid: at least one mode required");
    if (weights.size() != m || omega.size() != m)
        throw std::invalid_argument("ModeGrid: k, weights and omega must have equal length");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(weights[i] > 0.0)) throw std::invalid_argument("ModeGrid: weights must be positive");
        if (!(omega[i] > 0.0)) throw std::invalid_argument("ModeGrid: omega must be positive");
        if (i > 0 && !(k[i] > k[i - 1])) throw std::invalid_argument("ModeGrid: k must be strictly increasing");
    }
    if (mass < 0.0) throw std::invalid_argument("ModeGrid: mass must be non-negative");
}

std::size_t OccupationBasis::count_states(int modes, int cutoff) {
    // C(modes + cutoff, cutoff), saturating at SIZE_MAX.
    long double c = 1.0L;
    for (int i = 1; i <= cutoff; ++i) c = c * static_cast<long double>(modes + i) / i;
    if (c >= static_cast<long double>(std::numeric_limits<std::size_t>::max()))
        return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::llround(c));
}

OccupationBasis::OccupationBasis(int modes, int cutoff, std::size_t dimension_cap)
    : modes_(modes), cutoff_(cutoff), dim_(0) {
    if (modes < 1) throw std::invalid_argument("build_basis: mode count must be >= 1");
    if (cutoff < 0) throw std::invalid_argument("build_basis: cutoff must be >= 0");
    if (cutoff > std::numeric_limits<std::uint16_t>::max())
        throw std::invalid_argument("build_basis: cutoff too large");
    const std::size_t d = count_states(modes, cutoff);
    if (d > dimension_cap) {
        std::ostringstream os;
        os << "build_basis: dimension C(" << modes + cutoff << ", " << cutoff << ") = " << d
           << " exceeds cap " << dimension_cap;
        throw CapacityError(os.str());
    }
    dim_ = d;

    const int top = modes + cutoff;
    binom_.assign(static_cast<std::size_t>(top + 1), std::vector<std::size_t>(static_cast<std::size_t>(top + 1), 0));
    for (int a = 0; a <= top; ++a) {
        binom_[a][0] = 1;
        for (int b = 1; b <= a; ++b) binom_[a][b] = binom_[a - 1][b - 1] + (b <= a - 1 ? binom_[a - 1][b] : 0);
    }

    occupations_.reserve(dim_ * static_cast<std::size_t>(modes_));
    totals_.reserve(dim_);
    sector_offsets_.reserve(static_cast<std::size_t>(cutoff_) + 2);

    // Ascending lexicographic enumeration of compositions of n into M parts:
    // start at (0,...,0,n) and step to the successor.
    std::vector<int> occ(static_cast<std::size_t>(modes_), 0);
    for (int n = 0; n <= cutoff_; ++n) {
        sector_offsets_.push_back(totals_.size());
        std::fill(occ.begin(), occ.end(), 0);
        occ.back() = n;
        while (true) {
            for (int v : occ) occupations_.push_back(static_cast<std::uint16_t>(v));
            totals_.push_back(n);
            // Successor: find rightmost position i < M-1 such that some quanta
            // remain to its right, increment it and put the rest at the end.
            int i = modes_ - 2;
            int tail = occ.back();
            while (i >= 0 && tail == 0) {
                tail += occ[static_cast<std::size_t>(i)];
                --i;
            }
            if (i < 0) break;
            // tail counts quanta strictly right of i (positions i+1..M-1).
            ++occ[static_cast<std::size_t>(i)];
            --tail;
            for (int j = i + 1; j < modes_; ++j) occ[static_cast<std::size_t>(j)] = 0;
            occ.back() = tail;
        }
    }
    sector_offsets_.push_back(totals_.size());
    if (totals_.size() != dim_) throw std::logic_error("build_basis: enumeration count mismatch");
}

std::size_t OccupationBasis::compositions(int quanta, int parts) const {
    if (parts == 0) return quanta == 0 ? 1 : 0;
    return binom_[static_cast<std::size_t>(quanta + parts - 1)][static_cast<std::size_t>(parts - 1)];
}

std::size_t OccupationBasis::rank(std::span<const int> occupation) const {
    int n = 0;
    for (int v : occupation) n += v;
    std::size_t r = sector_offsets_[static_cast<std::size_t>(n)];
    int remaining = n;
    for (int i = 0; i + 1 < modes_; ++i) {
        const int parts = modes_ - i - 1;
        // States with a smaller value at position i precede; each fixes
        // remaining - t quanta over the remaining parts.
        for (int t = 0; t < occupation[static_cast<std::size_t>(i)]; ++t) r += compositions(remaining - t, parts);
        remaining -= occupation[static_cast<std::size_t>(i)];
    }
    return r;
}

std::size_t OccupationBasis::index_of(std::span<const int> occupation) const {
    if (static_cast<int>(occupation.size()) != modes_)
        throw std::out_of_range("index_of: occupation vector has wrong length");
    int n = 0;
    for (int v : occupation) {
        if (v < 0) throw std::out_of_range("index_of: negative occupation");
        n += v;
    }
    if (n > cutoff_) throw std::out_of_range("index_of: total number above cutoff");
    return rank(occupation);
}

BasisPtr build_basis(int modes, int cutoff, std::size_t dimension_cap) {
    return std::make_shared<const OccupationBasis>(modes, cutoff, dimension_cap);
}

namespace {

void check_mode(const OccupationBasis& b, int mode) {
    if (mode < 0 || mode >= b.modes()) throw std::out_of_range("ladder_op: mode index out of range");
}

SparseMatrix from_triplets(std::size_t dim, std::vector<Triplet>& t) {
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

}  // namespace

FockOperator ladder_op(const BasisPtr& basis, int mode, Ladder kind) {
    const OccupationBasis& b = *basis;
    check_mode(b, mode);
    std::vector<Triplet> t;
    t.reserve(b.dim());
    std::vector<int> occ(static_cast<std::size_t>(b.modes()));
    // Column-major sweep: for each source state j, its single image.
    for (std::size_t j = 0; j < b.dim(); ++j) {
        const auto s = b.state(j);
        const int nm = s[static_cast<std::size_t>(mode)];
        if (kind == Ladder::lower) {
            if (nm == 0) continue;
            std::copy(s.begin(), s.end(), occ.begin());
            --occ[static_cast<std::size_t>(mode)];
            t.emplace_back(static_cast<int>(b.rank(occ)), static_cast<int>(j), std::sqrt(static_cast<double>(nm)));
        } else {
            if (b.total(j) == b.cutoff()) continue;
            std::copy(s.begin(), s.end(), occ.begin());
            ++occ[static_cast<std::size_t>(mode)];
            t.emplace_back(static_cast<int>(b.rank(occ)), static_cast<int>(j),
                           std::sqrt(static_cast<double>(nm + 1)));
        }
    }
    return {basis, from_triplets(b.dim(), t), false};
}

FockOperator second_quantization(const BasisPtr& basis, const Matrix& one_particle) {
    const OccupationBasis& b = *basis;
    const int m = b.modes();
    if (one_particle.rows() != m || one_particle.cols() != m)
        throw std::invalid_argument("second_quantization: one-particle matrix must be M x M");
    if (!is_hermitian(one_particle)) throw std::invalid_argument("second_quantization: S must be Hermitian");

    std::vector<Triplet> t;
    std::vector<int> occ(static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < b.dim(); ++j) {
        const auto s = b.state(j);
        cplx diag = 0.0;
        for (int i = 0; i < m; ++i) diag += one_particle(i, i) * static_cast<double>(s[static_cast<std::size_t>(i)]);
        if (diag != cplx(0.0)) t.emplace_back(static_cast<int>(j), static_cast<int>(j), diag);
        // Off-diagonal hops a_i^† a_l, i != l.
        for (int l = 0; l < m; ++l) {
            const int nl = s[static_cast<std::size_t>(l)];
            if (nl == 0) continue;
            for (int i = 0; i < m; ++i) {
                if (i == l || one_particle(i, l) == cplx(0.0)) continue;
                std::copy(s.begin(), s.end(), occ.begin());
                const int ni = occ[static_cast<std::size_t>(i)];
                --occ[static_cast<std::size_t>(l)];
                ++occ[static_cast<std::size_t>(i)];
                const double amp = std::sqrt(static_cast<double>(nl) * static_cast<double>(ni + 1));
                t.emplace_back(static_cast<int>(b.rank(occ)), static_cast<int>(j), one_particle(i, l) * amp);
            }
        }
    }
    return {basis, from_triplets(b.dim(), t), true};
}

FockOperator second_quantization(const BasisPtr& basis, const RealVector& diagonal) {
    const OccupationBasis& b = *basis;
    if (diagonal.size() != b.modes()) throw std::invalid_argument("second_quantization: diagonal must have length M");
    std::vector<Triplet> t;
    t.reserve(b.dim());
    for (std::size_t j = 0; j < b.dim(); ++j) {
        const auto s = b.state(j);
        double e = 0.0;
        for (int i = 0; i < b.modes(); ++i) e += diagonal[i] * s[static_cast<std::size_t>(i)];
        if (e != 0.0) t.emplace_back(static_cast<int>(j), static_cast<int>(j), e);
    }
    return {basis, from_triplets(b.dim(), t), true};
}

FockOperator number_operator(const BasisPtr& basis) {
    const OccupationBasis& b = *basis;
    std::vector<Triplet> t;
    t.reserve(b.dim());
    for (std::size_t j = 0; j < b.dim(); ++j)
        if (b.total(j) > 0) t.emplace_back(static_cast<int>(j), static_cast<int>(j), static_cast<double>(b.total(j)));
    return {basis, from_triplets(b.dim(), t), true};
}

FockOperator field_operator(const BasisPtr& basis, const Vector& lambda) {
    const OccupationBasis& b = *basis;
    if (lambda.size() != b.modes()) throw std::invalid_argument("field_operator: λ must have length M");
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (!std::isfinite(lambda[i].real()) || !std::isfinite(lambda[i].imag()))
            throw std::invalid_argument("field_operator: λ must be finite");

    SparseMatrix phi(static_cast<Eigen::Index>(b.dim()), static_cast<Eigen::Index>(b.dim()));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < b.modes(); ++m) {
        if (lambda[m] == cplx(0.0)) continue;
        const SparseMatrix raise = ladder_op(basis, m, Ladder::raise).matrix;
        const SparseMatrix lower = ladder_op(basis, m, Ladder::lower).matrix;
        phi += (std::conj(lambda[m]) * inv_sqrt2) * raise + (lambda[m] * inv_sqrt2) * lower;
    }
    phi.makeCompressed();
    return {basis, phi, true};
}

RealVector sector_mask(const OccupationBasis& basis, int min_total) {
    RealVector mask = RealVector::Zero(static_cast<Eigen::Index>(basis.dim()));
    for (int n = std::max(0, min_total); n <= basis.cutoff(); ++n)
        mask.segment(static_cast<Eigen::Index>(basis.sector_offset(n)), static_cast<Eigen::Index>(basis.sector_size(n)))
            .setOnes();
    return mask;
}

}  // namespace fockgs::fock
