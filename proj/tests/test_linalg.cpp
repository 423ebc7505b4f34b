#include "doctest.h"
#include "test_util.hpp"

using namespace solvcert;
using namespace testutil;

TEST_CASE("vector infinity norm") {
    CHECK(inf_norm(CVector{0, 0, 0}) == 0.0);
    CHECK(inf_norm(CVector{}) == 0.0);
    CHECK(inf_norm(CVector{{3, 4}, 1}) == doctest::Approx(5.0));

    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const CVector v = rand_v(rng, 1 + t % 17, 10.0);
        double brute = 0;
        for (const auto& x : v) brute = std::max(brute, std::hypot(x.real(), x.imag()));
        CHECK(inf_norm(v) == doctest::Approx(brute).epsilon(1e-15));
    }
}

TEST_CASE("matrix infinity norm") {
    CHECK(inf_norm(ComplexMatrix::identity(7)) == 1.0);
    CHECK(inf_norm(ComplexMatrix{{1, -1}, {0, Complex(0, 2)}}) == doctest::Approx(2.0));
    std::mt19937_64 rng(12);
    for (int t = 0; t < 30; ++t) {
        const auto a = rand_m(rng, 1 + t % 9, 1 + t % 5);
        CHECK(inf_norm(a) == doctest::Approx(naive_row_sum_norm(a)).epsilon(1e-14));
    }
}

TEST_CASE("norm is submultiplicative and products match the naive kernel") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 30; ++t) {
        const auto a = rand_m(rng, 6, 4);
        const auto b = rand_m(rng, 4, 5);
        const auto ab = a * b;
        CHECK(max_abs_diff(ab, naive_mul(a, b)) < 1e-13);
        CHECK(inf_norm(ab) <= inf_norm(a) * inf_norm(b) * (1 + 1e-14));
    }
}

TEST_CASE("matrix rejects non-finite entries") {
    CHECK_THROWS_AS(ComplexMatrix(1, 1, {Complex(NAN, 0)}), std::invalid_argument);
    CHECK_THROWS_AS((ComplexMatrix{{Complex(0, INFINITY)}}), std::invalid_argument);
}

TEST_CASE("dense inversion") {
    SUBCASE("identity") {
        const auto inv = invert_dense(ComplexMatrix::identity(4));
        CHECK(inv.inverse == ComplexMatrix::identity(4));
        CHECK(inv.condition_estimate == doctest::Approx(1.0));
    }
    SUBCASE("diagonal") {
        const auto inv = invert_dense(ComplexMatrix{{2, 0}, {0, Complex(0, 4)}});
        CHECK(std::abs(inv.inverse(0, 0) - 0.5) < 1e-15);
        CHECK(std::abs(inv.inverse(1, 1) - Complex(0, -0.25)) < 1e-15);
        CHECK(std::abs(inv.inverse(0, 1)) == 0.0);
    }
    SUBCASE("random well conditioned multiply back") {
        std::mt19937_64 rng(14);
        const std::size_t n = 20;
        auto a = rand_m(rng, n, n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += 25.0;
        const auto inv = invert_dense(a);
        const auto prod = naive_mul(a, inv.inverse);
        CHECK(inf_norm(prod - ComplexMatrix::identity(n)) <= 1e-9 * n);
    }
    SUBCASE("singular matrix reports the pivot") {
        const ComplexMatrix s{{1, 2, 3}, {2, 4, 6}, {0, 0, 1}};
        try {
            invert_dense(s);
            FAIL("expected SingularMatrixError");
        } catch (const SingularMatrixError& e) {
            CHECK(e.pivot() < 3);
        }
    }
    SUBCASE("non-square") { CHECK_THROWS_AS(invert_dense(ComplexMatrix(2, 3)), std::invalid_argument); }
}

TEST_CASE("real LU solve") {
    const RealMatrix a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
    const std::vector<double> b{1, 2, 3};
    const auto x = LuFactorization<double>(a).solve(b);
    for (int i = 0; i < 3; ++i) {
        double r = -b[i];
        for (int j = 0; j < 3; ++j) r += a(i, j) * x[j];
        CHECK(std::abs(r) < 1e-14);
    }
}

TEST_CASE("J* assembly") {
    SUBCASE("zero loading gives the identity") {
        std::mt19937_64 rng(15);
        const auto z = rand_m(rng, 3, 3);
        const auto blk = assemble_jstar(z, CVector(3));
        CHECK(blk.m == ComplexMatrix::identity(3));
        CHECK(inf_norm(blk.n) == 0.0);
        CHECK(blk.inv_jstar_norm == doctest::Approx(1.0));
    }
    SUBCASE("scalar block inverse by hand") {
        const Complex z(0.03, -0.04), sigma(-0.7, -0.2);
        const auto blk = assemble_jstar(ComplexMatrix{{z}}, CVector{sigma});
        // J = [[1, conj(z sigma)], [z sigma, 1]]
        const Complex w = z * sigma;
        const Complex m = 1.0 / (1.0 - std::conj(w) * w);
        const Complex nn = -std::conj(w) * m;
        CHECK(std::abs(blk.m(0, 0) - m) < 1e-15);
        CHECK(std::abs(blk.n(0, 0) - nn) < 1e-15);
        CHECK(blk.inv_jstar_norm == doctest::Approx(std::abs(m) + std::abs(nn)));
    }
    SUBCASE("random contraction reconstructs") {
        std::mt19937_64 rng(16);
        for (std::size_t n : {1u, 5u, 25u}) {
            auto z = rand_m(rng, n, n, 1.0 / n);
            const CVector s = rand_v(rng, n, 0.4);
            REQUIRE(inf_norm(scale_columns(z, s)) < 1.0);
            const auto blk = assemble_jstar(z, s);
            const auto j = build_jstar(z, s);
            const auto inv = jstar_inverse_from_blocks(blk.m, blk.n);
            CHECK(inf_norm(naive_mul(j, inv) - ComplexMatrix::identity(2 * n)) <= 1e-9 * n);
            CHECK(blk.reconstruction_residual <= 1e-9 * n);
            CHECK(blk.inv_jstar_norm == doctest::Approx(naive_row_sum_norm(inv)).epsilon(1e-13));
        }
    }
    SUBCASE("singular J* is a base validity error") {
        // |z s| = 1 makes the scalar J* singular.
        CHECK_THROWS_AS(assemble_jstar(ComplexMatrix{{Complex(1, 0)}}, CVector{Complex(1, 0)}), BaseValidityError);
    }
}
