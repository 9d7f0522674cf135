#include "doctest.h"

#include "fockgs/fock.hpp"
#include "fockgs/spectral.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>
#include <set>

using namespace fockgs;
using namespace fockgs::fock;

namespace {

Matrix dense(const FockOperator& op) { return Matrix(op.matrix); }

std::vector<int> as_vec(std::span<const std::uint16_t> s) { return {s.begin(), s.end()}; }

Vector random_vector(Eigen::Index n, std::uint64_t seed) { return spectral::random_unit_vector(n, seed); }

}  // namespace

TEST_CASE("build_basis dimensions and ordering") {
    SUBCASE("single-mode ladder") {
        auto b = build_basis(1, 4);
        REQUIRE(b->dim() == 5);
        for (int n = 0; n <= 4; ++n) CHECK(b->state(static_cast<std::size_t>(n))[0] == n);
    }
    SUBCASE("M=2, N_max=2") { CHECK(build_basis(2, 2)->dim() == 6); }
    SUBCASE("M=3, N_max=3 matches brute-force enumeration") {
        auto b = build_basis(3, 3);
        const auto all = oracle::enumerate_occupations(3, 3);
        REQUIRE(all.size() == 20);
        REQUIRE(b->dim() == all.size());
        std::set<std::vector<int>> expected(all.begin(), all.end());
        std::set<std::vector<int>> got;
        for (std::size_t i = 0; i < b->dim(); ++i) got.insert(as_vec(b->state(i)));
        CHECK(got == expected);
    }
    SUBCASE("vacuum first, sectors contiguous, lexicographic inside sectors") {
        auto b = build_basis(3, 4);
        CHECK(b->total(0) == 0);
        for (std::size_t i = 1; i < b->dim(); ++i) {
            CHECK(b->total(i) >= b->total(i - 1));
            if (b->total(i) == b->total(i - 1)) CHECK(as_vec(b->state(i - 1)) < as_vec(b->state(i)));
        }
        for (int n = 0; n <= 4; ++n)
            for (std::size_t i = b->sector_offset(n); i < b->sector_offset(n + 1); ++i) CHECK(b->total(i) == n);
    }
    SUBCASE("index map is a bijection") {
        for (auto [m, n] : {std::pair{1, 6}, {2, 5}, {4, 3}, {5, 2}}) {
            auto b = build_basis(m, n);
            CHECK(b->dim() == OccupationBasis::count_states(m, n));
            for (std::size_t i = 0; i < b->dim(); ++i) CHECK(b->index_of(as_vec(b->state(i))) == i);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_basis(0, 2), std::invalid_argument);
        CHECK_THROWS_AS(build_basis(2, -1), std::invalid_argument);
        CHECK_THROWS_AS(build_basis(40, 10), CapacityError);
        CHECK_THROWS_AS(build_basis(3, 3, 10), CapacityError);
        auto b = build_basis(2, 2);
        CHECK_THROWS_AS(b->index_of(std::vector<int>{2, 1}), std::out_of_range);
        CHECK_THROWS_AS(b->index_of(std::vector<int>{1}), std::out_of_range);
    }
    SUBCASE("N_max = 0 is the vacuum alone") { CHECK(build_basis(3, 0)->dim() == 1); }
}

TEST_CASE("ladder operators") {
    auto b = build_basis(1, 2);
    const Matrix lower = dense(ladder_op(b, 0, Ladder::lower));
    const Matrix raise = dense(ladder_op(b, 0, Ladder::raise));
    CHECK(std::abs(lower(0, 1) - 1.0) < 1e-15);                // a|1⟩ = |0⟩
    CHECK(std::abs(raise(2, 1) - std::sqrt(2.0)) < 1e-15);     // a†|1⟩ = √2|2⟩
    CHECK(raise.col(2).norm() == 0.0);                          // top sector annihilated
    CHECK((lower - oracle::single_mode_lower(2)).norm() == 0.0);

    auto b3 = build_basis(3, 3);
    for (int m = 0; m < 3; ++m) {
        const Matrix a = dense(ladder_op(b3, m, Ladder::lower));
        const Matrix ad = dense(ladder_op(b3, m, Ladder::raise));
        CHECK(a.col(0).norm() == 0.0);  // a_m Ω = 0
        CHECK((a - ad.adjoint()).norm() == 0.0);
    }
    CHECK_THROWS_AS(ladder_op(b3, 3, Ladder::lower), std::out_of_range);
    CHECK_THROWS_AS(ladder_op(b3, -1, Ladder::raise), std::out_of_range);
}

TEST_CASE("canonical commutation relations below the cutoff") {
    auto b = build_basis(3, 4);
    const Eigen::Index d = static_cast<Eigen::Index>(b->dim());
    std::vector<Matrix> a, ad;
    for (int m = 0; m < 3; ++m) {
        a.push_back(dense(ladder_op(b, m, Ladder::lower)));
        ad.push_back(dense(ladder_op(b, m, Ladder::raise)));
    }
    const RealVector below = sector_mask(*b, 0) - sector_mask(*b, b->cutoff());
    for (int trial = 0; trial < 5; ++trial) {
        Vector psi = random_vector(d, 100 + trial).cwiseProduct(below.cast<cplx>());
        Vector full = random_vector(d, 200 + trial);
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
                const Matrix ccr = a[m] * ad[n] - ad[n] * a[m];
                const Vector defect = ccr * psi - (m == n ? psi : Vector::Zero(d));
                CHECK(defect.norm() < 1e-14);
                CHECK(((a[m] * a[n] - a[n] * a[m]) * full).norm() < 1e-14);
            }
    }
    // The truncation defect of [a, a†] lives exactly on the top sector.
    const Matrix ccr = a[0] * ad[0] - ad[0] * a[0] - Matrix::Identity(d, d);
    const RealVector top = sector_mask(*b, b->cutoff());
    for (Eigen::Index j = 0; j < d; ++j)
        if (top[j] == 0.0) CHECK(ccr.col(j).norm() < 1e-14);
}

TEST_CASE("second quantization") {
    SUBCASE("identity gives the number operator") {
        auto b = build_basis(3, 3);
        const Matrix dg = dense(second_quantization(b, Matrix(Matrix::Identity(3, 3))));
        CHECK((dg - dense(number_operator(b))).norm() == 0.0);
    }
    SUBCASE("diag(0.3, 0.5) spectrum matches occupation-sum enumeration") {
        auto b = build_basis(2, 2);
        RealVector s(2);
        s << 0.3, 0.5;
        const auto op = second_quantization(b, s);
        const RealVector ev = spectral::full_spectrum_small(op.matrix);
        const auto ref = oracle::occupation_sums({0.3, 0.5}, 2);
        REQUIRE(ref.size() == 6);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(ev[static_cast<Eigen::Index>(i)] == doctest::Approx(ref[i]).epsilon(1e-14));
        const std::vector<double> distinct = {0.0, 0.3, 0.5, 0.6, 0.8, 1.0};
        std::set<long> keys;
        for (double v : ref) keys.insert(std::lround(v * 1e6));
        CHECK(keys.size() == distinct.size());
    }
    SUBCASE("point spectrum equals occupation sums for small instances") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.1, 2.0);
        for (int m = 1; m <= 3; ++m)
            for (int n = 0; n <= 3; ++n) {
                std::vector<double> s(static_cast<std::size_t>(m));
                for (auto& x : s) x = u(rng);
                const auto op = second_quantization(build_basis(m, n), RealVector(Eigen::Map<RealVector>(s.data(), m)));
                const RealVector ev = spectral::full_spectrum_small(op.matrix);
                const auto ref = oracle::occupation_sums(s, n);
                REQUIRE(static_cast<std::size_t>(ev.size()) == ref.size());
                for (std::size_t i = 0; i < ref.size(); ++i)
                    CHECK(std::abs(ev[static_cast<Eigen::Index>(i)] - ref[i]) < 1e-12);
            }
    }
    SUBCASE("dΓ(S)Ω = 0 and block diagonal for a general Hermitian S") {
        auto b = build_basis(3, 3);
        Matrix s = Matrix::Random(3, 3);
        s = (s + s.adjoint()).eval();
        const Matrix dg = dense(second_quantization(b, s));
        CHECK(dg.col(0).norm() == 0.0);
        CHECK(is_hermitian(dg));
        for (Eigen::Index i = 0; i < dg.rows(); ++i)
            for (Eigen::Index j = 0; j < dg.cols(); ++j)
                if (b->total(static_cast<std::size_t>(i)) != b->total(static_cast<std::size_t>(j))) CHECK(dg(i, j) == cplx(0.0));
        // dΓ(S) = Σ S_ij a_i^† a_j built from the ladder matrices.
        Matrix ref = Matrix::Zero(dg.rows(), dg.cols());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                ref += s(i, j) * dense(ladder_op(b, i, Ladder::raise)) * dense(ladder_op(b, j, Ladder::lower));
        CHECK((dg - ref).norm() < 1e-13);
    }
    SUBCASE("non-Hermitian S rejected") {
        Matrix s = Matrix::Zero(2, 2);
        s(0, 1) = 1.0;
        CHECK_THROWS_AS(second_quantization(build_basis(2, 2), s), std::invalid_argument);
    }
    SUBCASE("[dΓ(ω), a_m] = -ω_m a_m on every sector") {
        auto b = build_basis(3, 3);
        RealVector w(3);
        w << 0.7, 1.1, 2.3;
        const Matrix dg = dense(second_quantization(b, w));
        for (int m = 0; m < 3; ++m) {
            const Matrix a = dense(ladder_op(b, m, Ladder::lower));
            CHECK((dg * a - a * dg + w[m] * a).norm() < 1e-14);
        }
    }
    SUBCASE("e^{itdΓ(ω)} a_m e^{-itdΓ(ω)} = e^{-itω_m} a_m") {
        auto b = build_basis(2, 3);
        RealVector w(2);
        w << 0.4, 1.3;
        const Matrix dg = dense(second_quantization(b, w));
        const RealVector below = sector_mask(*b, 0) - sector_mask(*b, b->cutoff());
        for (double t : {0.3, 1.7, -2.2}) {
            const Matrix u = (kI * t * dg).exp();
            const Matrix ud = (-kI * t * dg).exp();
            for (int m = 0; m < 2; ++m) {
                const Matrix a = dense(ladder_op(b, m, Ladder::lower));
                const Vector psi = random_vector(a.cols(), 11).cwiseProduct(below.cast<cplx>());
                CHECK(((u * a * ud - std::exp(-kI * t * w[m]) * a) * psi).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("number operator") {
    auto b = build_basis(2, 3);
    const Matrix n = dense(number_operator(b));
    CHECK(n.col(0).norm() == 0.0);
    const Vector e21 = Vector::Unit(n.rows(), static_cast<Eigen::Index>(b->index_of(std::vector<int>{2, 1})));
    CHECK((n * e21 - 3.0 * e21).norm() == 0.0);
    const RealVector ev = spectral::full_spectrum_small(number_operator(b).matrix);
    const std::vector<double> expected = {0, 1, 1, 2, 2, 2, 3, 3, 3, 3};
    REQUIRE(ev.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(ev[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]));
}

TEST_CASE("A_M = (N+1)^{-1/2} Σ a†a (N+1)^{-1/2} is a contraction") {
    auto b = build_basis(3, 4);
    const Matrix n = dense(number_operator(b));
    const Eigen::Index d = n.rows();
    Matrix inv_sqrt = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) inv_sqrt(i, i) = 1.0 / std::sqrt(n(i, i).real() + 1.0);
    Matrix partial = Matrix::Zero(d, d);
    for (int m = 0; m < 3; ++m) {
        partial += dense(ladder_op(b, m, Ladder::raise)) * dense(ladder_op(b, m, Ladder::lower));
        const Matrix am = inv_sqrt * partial * inv_sqrt;
        CHECK(spectral::dense_spectral_norm(am) <= 1.0 + 1e-14);
    }
    Matrix ratio = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) ratio(i, i) = n(i, i) / (n(i, i) + 1.0);
    CHECK((inv_sqrt * partial * inv_sqrt - ratio).norm() < 1e-14);
}

TEST_CASE("field operator") {
    auto b1 = build_basis(1, 3);
    Vector zero = Vector::Zero(1);
    CHECK(field_operator(b1, zero).matrix.nonZeros() == 0);
    Vector lam(1);
    lam << 0.8;
    const Matrix phi = dense(field_operator(b1, lam));
    CHECK(std::abs(phi(0, 1) - 0.8 / std::sqrt(2.0)) < 1e-15);
    CHECK((phi - 0.8 / std::sqrt(2.0) * (oracle::single_mode_lower(3) + oracle::single_mode_lower(3).adjoint()))
              .norm() < 1e-15);

    auto b = build_basis(3, 3);
    Vector l(3);
    l << cplx(0.3, -0.2), cplx(-1.1, 0.4), cplx(0.0, 0.9);
    const FockOperator f = field_operator(b, l);
    CHECK(f.hermitian);
    CHECK(is_hermitian(f.matrix));
    const Matrix p = dense(f);
    const Vector omega = Vector::Unit(p.rows(), 0);
    // ⟨Ω, φ(λ)² Ω⟩ = ‖λ‖²/2, from a(λ)a†(λ̄)Ω = Σ|λ_m|² Ω.
    double brute = 0.0;
    for (int m = 0; m < 3; ++m) brute += std::norm(l[m]);
    CHECK(std::real(omega.dot(p * p * omega)) == doctest::Approx(brute / 2.0).epsilon(1e-14));

    // Linearity of each ladder part: φ(αλ₁+βλ₂) = α̅-part on a† and α-part on a.
    Vector l2(3);
    l2 << cplx(0.5, 0.5), 0.0, cplx(-0.3, 0.1);
    const cplx c1(0.7, 0.2), c2(-1.3, 0.4);
    const Matrix lhs = dense(field_operator(b, c1 * l + c2 * l2));
    Matrix rhs = Matrix::Zero(p.rows(), p.cols());
    for (int m = 0; m < 3; ++m) {
        const Matrix am = dense(ladder_op(b, m, Ladder::lower));
        const Matrix adm = dense(ladder_op(b, m, Ladder::raise));
        const cplx lm = c1 * l[m] + c2 * l2[m];
        rhs += (std::conj(lm) * adm + lm * am) / std::sqrt(2.0);
    }
    CHECK((lhs - rhs).norm() < 1e-14);
    CHECK_THROWS_AS(field_operator(b, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("FockVector sectors") {
    auto b = build_basis(2, 3);
    FockVector v{b, Vector::Zero(static_cast<Eigen::Index>(b->dim()))};
    v.coeffs[static_cast<Eigen::Index>(b->index_of(std::vector<int>{1, 1}))] = 2.0;
    CHECK(v.sector(2).norm() == doctest::Approx(2.0));
    CHECK(v.sector(1).norm() == 0.0);
    CHECK(v.sector(0).size() == 1);
    CHECK(v.sector(3).size() == 4);
}
