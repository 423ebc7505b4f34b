#include "doctest.h"
#include "solvcert/cert.hpp"
#include "test_util.hpp"

using namespace solvcert;
using namespace testutil;

namespace {

ComplexMatrix diag(const CVector& d) { return ComplexMatrix::diagonal(d); }

CVector mv(const ComplexMatrix& a, const CVector& x) {
    CVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

CVector cj(const CVector& v) {
    CVector out(v);
    for (auto& x : out) x = std::conj(x);
    return out;
}

ComplexMatrix cj(const ComplexMatrix& a) {
    ComplexMatrix out(a);
    for (auto& x : out.data()) x = std::conj(x);
    return out;
}

CVector sub(const CVector& a, const CVector& b) {
    CVector c(a);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

double vnorm(const CVector& v) {
    double m = 0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Terms {
    double a_vec, a_mat, b, c1, c2;
};

// Certificate norms built from explicit dense products.
Terms oracle_terms(const BasePoint& bp, const CVector& s) {
    const auto& z = bp.z_star();
    const auto& m = bp.blocks.m;
    const auto& n = bp.blocks.n;
    const CVector ds = sub(s, bp.s_star);
    const ComplexMatrix mcz = naive_mul(m, cj(z));
    const ComplexMatrix nz = naive_mul(n, z);
    Terms t{};
    CVector first = mv(mcz, cj(ds));
    const CVector second = mv(nz, ds);
    for (std::size_t i = 0; i < first.size(); ++i) first[i] += second[i];
    t.a_vec = vnorm(first);
    t.a_mat = naive_row_sum_norm(naive_mul(mcz, diag(cj(ds))) + naive_mul(nz, diag(ds)));
    const ComplexMatrix inv = jstar_inverse_from_blocks(m, n);
    t.b = naive_row_sum_norm(inv) * naive_row_sum_norm(naive_mul(z, diag(s)));
    const CVector zds = mv(z, ds);
    t.c1 = naive_row_sum_norm(naive_mul(mcz, diag(cj(ds))) + naive_mul(n, diag(zds)));
    t.c2 = naive_row_sum_norm(naive_mul(m, diag(cj(zds))) + naive_mul(nz, diag(ds)));
    return t;
}

// Fixed-point right-hand side expanded term by term from its definition.
CVector oracle_rhs(const BasePoint& bp, const CVector& s, const CVector& y) {
    const auto& z = bp.z_star();
    const auto& m = bp.blocks.m;
    const auto& n = bp.blocks.n;
    const CVector ds = sub(s, bp.s_star);
    auto zeta_of = [&](const CVector& v) { return naive_mul(cj(z), diag(cj(v))); };
    auto eta_of = [&](const CVector& v) { return cj(mv(z, v)); };
    const CVector e = eta_of(ds);
    const ComplexMatrix zs = zeta_of(s), zd = zeta_of(ds);
    CVector out(y.size());
    auto add = [&](const CVector& v, double sign) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * v[i];
    };
    add(mv(m, e), -1);
    add(mv(n, cj(e)), -1);
    add(mv(naive_mul(m, naive_mul(diag(y), zs)), cj(y)), -1);
    add(mv(naive_mul(n, naive_mul(diag(cj(y)), cj(zs))), y), -1);
    add(mv(naive_mul(m, diag(e)) + naive_mul(n, cj(zd)), y), -1);
    add(mv(naive_mul(m, zd) + naive_mul(n, diag(cj(e))), cj(y)), -1);
    return out;
}

CVector scaled(const CVector& base, double f, std::mt19937_64& rng, double jitter) {
    CVector s(base);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (auto& x : s) x = x * f + Complex(u(rng), u(rng)) * std::abs(x);
    return s;
}

}  // namespace

TEST_CASE("zero-loading base point") {
    const auto m = model_of("case33bw.m");
    const BasePoint bp = base_point(m, CVector(m->n));
    CHECK(bp.blocks.m == ComplexMatrix::identity(m->n));
    CHECK(inf_norm(bp.blocks.n) == 0.0);
    CHECK(bp.blocks.inv_jstar_norm == doctest::Approx(1.0));
    const auto zref = cj(invert_dense(m->y).inverse);
    CHECK(max_abs_diff(bp.z_star(), zref) < 1e-12 * inf_norm(zref));
}

TEST_CASE("two-bus base point") {
    const auto m = model_of(two_bus_case(0.03, 0.04));
    const BasePoint bp = base_point(m, CVector{0.0});
    CHECK(std::abs(bp.z_star()(0, 0) - Complex(0.03, -0.04)) < 1e-15);
    CHECK(bp.z_norm == doctest::Approx(0.05));
}

TEST_CASE("eta(s*) + gamma* = 1 on loaded feeders") {
    for (const char* f : {"case18.m", "case33bw.m", "case69.m", "case141.m"}) {
        const auto m = model_of(f);
        const BasePoint bp = base_point(m, m->s_base);
        const CVector e = eta(bp, bp.s_star);
        for (std::size_t i = 0; i < m->n; ++i) CHECK(std::abs(e[i] + bp.gamma_star[i] - 1.0) < 1e-8);
    }
}

TEST_CASE("base point rejects unsolved profiles") {
    const auto m = model_of("case33bw.m");
    CHECK_THROWS_AS(base_point_from_solution(m, m->v_zero, m->s_base), NonConvergenceError);
    CVector huge = m->s_base;
    for (auto& x : huge) x *= 100.0;
    CHECK_THROWS_AS(base_point(m, huge), NonConvergenceError);
}

TEST_CASE("zeta and eta") {
    const auto m = model_of("case18.m");
    const BasePoint bp = base_point(m, m->s_base);
    CHECK(inf_norm(zeta(bp, CVector(m->n))) == 0.0);
    CHECK(inf_norm(eta(bp, CVector(m->n))) == 0.0);
    std::mt19937_64 rng(31);
    const CVector s = rand_v(rng, m->n);
    const ComplexMatrix zt = zeta(bp, s);
    const CVector et = eta(bp, s);
    for (std::size_t i = 0; i < m->n; ++i) {
        Complex zs{};
        for (std::size_t k = 0; k < m->n; ++k) {
            CHECK(std::abs(zt(i, k) - std::conj(bp.z_star()(i, k)) * std::conj(s[k])) < 1e-15);
            zs += bp.z_star()(i, k) * s[k];
        }
        CHECK(std::abs(et[i] - std::conj(zs)) < 1e-13);
    }

    const auto m2 = model_of(two_bus_case(0.03, 0.04));
    const BasePoint b2 = base_point(m2, CVector{0.0});
    const Complex z(0.03, -0.04), sigma(-0.3, 0.2);
    CHECK(std::abs(zeta(b2, CVector{sigma})(0, 0) - std::conj(z) * std::conj(sigma)) < 1e-15);
    CHECK(std::abs(eta(b2, CVector{sigma})[0] - std::conj(z * sigma)) < 1e-15);
}

TEST_CASE("certificate terms match dense-product oracle") {
    std::mt19937_64 rng(32);
    for (const char* f : {"case18.m", "case33bw.m"}) {
        const auto m = model_of(f);
        const BasePoint bp = base_point(m, m->s_base);
        for (int t = 0; t < 5; ++t) {
            const CVector s = scaled(m->s_base, 1.5, rng, 1.0);
            const auto got = certificate_terms(bp, s);
            const Terms o = oracle_terms(bp, s);
            CHECK(got.first_vector == doctest::Approx(o.a_vec).epsilon(1e-11));
            CHECK(got.first_matrix == doctest::Approx(o.a_mat).epsilon(1e-11));
            CHECK(got.quadratic == doctest::Approx(o.b).epsilon(1e-11));
            CHECK(got.linear_conj == doctest::Approx(o.c1).epsilon(1e-11));
            CHECK(got.linear == doctest::Approx(o.c2).epsilon(1e-11));
            CHECK(got.first_vector <= got.first_matrix * (1 + 1e-14));
        }
    }
}

TEST_CASE("certify_r") {
    SUBCASE("no deviation leaves only the quadratic term") {
        const auto m = model_of("case33bw.m");
        const BasePoint bp = base_point(m, m->s_base);
        const auto rep = certify_r(bp, m->s_base, 0.3);
        CHECK(rep.lhs == doctest::Approx(bp.blocks.inv_jstar_norm * inf_norm(scale_columns(bp.z_star(), m->s_base)) * 0.3));
        CHECK(rep.passed);
        REQUIRE(rep.envelope);
        for (std::size_t i = 0; i < m->n; ++i) {
            CHECK(rep.envelope->lower[i] == doctest::Approx(std::abs(bp.v_star[i]) / 1.3));
            CHECK(rep.envelope->upper[i] == doctest::Approx(std::abs(bp.v_star[i]) / 0.7));
        }
        CHECK_FALSE(certify_r(bp, m->s_base, 1.5).envelope);
    }
    SUBCASE("two-bus closed form") {
        const auto m = model_of(two_bus_case(0.03, 0.04));
        const BasePoint bp = base_point(m, CVector{0.0});
        const Complex s(-1.2, 0.7);
        const double a = 0.05 * std::abs(s);
        for (double r : {0.2, 0.5, 1.0, 2.0}) {
            const auto rep = certify_r(bp, CVector{s}, r);
            CHECK(rep.lhs == doctest::Approx(a / r + a * r + 2 * a).epsilon(1e-13));
            CHECK(rep.margin == doctest::Approx(1 - rep.lhs));
        }
        CHECK(certify(bp, CVector{s}).lhs == doctest::Approx(4 * a).epsilon(1e-13));
    }
    SUBCASE("radius must be positive") {
        const auto m = model_of(two_bus_case(0.03, 0.04));
        const BasePoint bp = base_point(m, CVector{0.0});
        CHECK_THROWS_AS(certify_r(bp, CVector{0.0}, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(certify_r(bp, CVector{0.0}, -1.0), std::invalid_argument);
    }
}

TEST_CASE("r-free certificate") {
    SUBCASE("base injection") {
        const auto m = model_of("case69.m");
        const BasePoint bp = base_point(m, m->s_base);
        const auto rep = certify(bp, m->s_base);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.margin == 1.0);
        CHECK(rep.passed);
    }
    SUBCASE("two-bus region is the analytic disc") {
        const double r = 0.03, x = 0.04;
        const auto m = model_of(two_bus_case(r, x));
        const BasePoint bp = base_point(m, CVector{0.0});
        for (int i = -50; i <= 50; ++i)
            for (int k = -50; k <= 50; ++k) {
                const double p = 0.12 * i, q = 0.12 * k;
                const double k2 = std::sqrt((r * r + x * x) * (p * p + q * q));
                if (std::abs(k2 - 0.25) < 1e-12) continue;
                CHECK(certify(bp, CVector{Complex(-p, -q)}).passed == (k2 <= 0.25));
            }
    }
    SUBCASE("certify implies certify_r at r_used") {
        std::mt19937_64 rng(33);
        for (const char* f : {"case18.m", "case33bw.m"}) {
            const auto m = model_of(f);
            const BasePoint bp = base_point(m, m->s_base);
            for (int t = 0; t < 40; ++t) {
                const CVector s = scaled(m->s_base, 1.0 + 0.4 * t / 40.0, rng, 0.5);
                const auto rep = certify(bp, s);
                REQUIRE(rep.r_used);
                const auto& tm = rep.terms;
                const double ru = *rep.r_used;
                // r_used minimises a/r + b r + c with a the matrix-norm term.
                const double at_ru = tm.first_matrix / ru + tm.quadratic * ru + tm.linear_sum();
                CHECK(std::abs(at_ru - rep.lhs) <= 1e-12 * std::max(1.0, rep.lhs));
                if (rep.passed) CHECK(certify_r(bp, s, ru).passed);
            }
        }
    }
}

TEST_CASE("union of fixed-radius regions") {
    const auto m = model_of("case33bw.m");
    const BasePoint bp = base_point(m, m->s_base);
    std::mt19937_64 rng(34);
    for (int t = 0; t < 30; ++t) {
        const CVector s = scaled(m->s_base, 1.3, rng, 0.4);
        for (double r : {0.2, 0.4, 0.6, 0.8}) {
            const auto within = certify_within(bp, s, r);
            // Anything certified at some radius up to r is certified by the union.
            for (double rr : {0.05, 0.1, r / 2, r})
                if (certify_r(bp, s, rr).passed) CHECK(within.passed);
            REQUIRE(within.r_used);
            CHECK(*within.r_used <= r);
        }
    }
}

TEST_CASE("certified gain along a direction") {
    const auto m = model_of(two_bus_case(0.03, 0.04));
    const BasePoint bp = base_point(m, CVector{0.0});
    CHECK(certified_gain_direction(bp, CVector{Complex(-0.6, -0.8)}, 1e-10) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK_THROWS_AS(certified_gain_direction(bp, CVector{0.0}), std::invalid_argument);

    const auto m33 = model_of("case33bw.m");
    const BasePoint b33 = base_point(m33, m33->s_base);
    std::mt19937_64 rng(35);
    for (int t = 0; t < 60; ++t) {
        const CVector d = rand_unit_direction(rng, m33->n);
        const double lb = certified_gain_direction(b33, d, 1e-8);
        const double lr = loadability_limit(*m33, b33.s_star, d, {1e-8});
        CHECK(lb <= lr * (1 + 1e-5));
    }
}

TEST_CASE("certified admissible gain") {
    SUBCASE("two-bus zero base") {
        const auto m = model_of(two_bus_case(0.03, 0.04));
        const BasePoint bp = base_point(m, CVector{0.0});
        const GainReport g = certified_admissible_gain(bp);
        CHECK(g.a == doctest::Approx(0.05));
        CHECK(g.b == doctest::Approx(0.05));
        CHECK(g.sigma == 0.0);
        CHECK(g.lambda_m == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(g.cap == doctest::Approx(10.0));
        CHECK(g.lambda_cag == doctest::Approx(5.0).epsilon(1e-14));
    }
    SUBCASE("strong form holds with equality at lambda_M") {
        for (const char* f : {"case18.m", "case33bw.m", "case69.m"}) {
            const auto m = model_of(f);
            const GainReport g = certified_admissible_gain(base_point(m, m->s_base));
            CHECK(g.lambda_cag == doctest::Approx(std::min(g.lambda_m, g.cap)));
            const double l = g.lambda_m;
            const double lhs = 2 * std::sqrt(g.a * g.b * l * (g.sigma + l)) + 2 * g.a * l;
            CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(g.certified);
        }
    }
}

TEST_CASE("homogeneous direction") {
    const CVector d = homogeneous_direction(4, 0.9);
    CHECK(inf_norm(d) == doctest::Approx(1.0));
    for (const auto& x : d) CHECK(x.real() / x.imag() == doctest::Approx(0.9 / std::sqrt(1 - 0.81)));
    CHECK(d[0].real() < 0);
    CHECK_THROWS_AS(homogeneous_direction(3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(homogeneous_direction(3, 1.2), std::invalid_argument);
}

TEST_CASE("fixed-point map") {
    const auto m = model_of("case33bw.m");
    const BasePoint bp = base_point(m, m->s_base);
    std::mt19937_64 rng(36);

    SUBCASE("base point is a fixed point") {
        CHECK(inf_norm(fixed_point_rhs(bp, m->s_base, CVector(m->n))) < 1e-14);
    }
    SUBCASE("matches the term-by-term expansion") {
        for (int t = 0; t < 5; ++t) {
            const CVector s = scaled(m->s_base, 1.4, rng, 0.5);
            const CVector y = rand_v(rng, m->n, 0.3);
            const CVector got = fixed_point_rhs(bp, s, y);
            const CVector ref = oracle_rhs(bp, s, y);
            CHECK(vnorm(sub(got, ref)) <= 1e-12 * std::max(1.0, vnorm(ref)));
        }
    }
    SUBCASE("power-flow solutions are fixed points") {
        for (double f : {0.5, 1.5, 2.0}) {
            CVector s = m->s_base;
            for (auto& x : s) x *= f;
            const auto sol = newton_pf(*m, s, bp.v_star, {1e-13, 50, 30, 1.0});
            REQUIRE(sol.final_mismatch < 1e-11);
            const FixedPointState st = fixed_point_state(bp, sol.v);
            const CVector yp = fixed_point_rhs(bp, s, st.y);
            CHECK(vnorm(sub(yp, st.y)) < 1e-9);
            for (std::size_t i = 0; i < m->n; ++i)
                CHECK(std::abs(st.gamma_star[i] - bp.gamma_star[i]) < 1e-15);
        }
    }
    SUBCASE("certified radius is mapped into itself") {
        std::uniform_real_distribution<double> u(0, 1);
        int checked = 0;
        for (int t = 0; t < 40; ++t) {
            const CVector s = scaled(m->s_base, 1.0 + u(rng), rng, 0.5);
            const auto rep = certify(bp, s);
            if (!rep.passed) continue;
            const double r = *rep.r_used;
            REQUIRE(certify_r(bp, s, r).passed);
            ++checked;
            for (int k = 0; k < 50; ++k) {
                CVector y(m->n);
                for (auto& x : y) x = std::polar(r * std::sqrt(u(rng)), 2 * 3.14159265358979 * u(rng));
                y[k % m->n] = std::polar(r, 2 * 3.14159265358979 * u(rng));
                CHECK(vnorm(fixed_point_rhs(bp, s, y)) <= r * (1 + 1e-12));
            }
        }
        CHECK(checked > 5);
    }
}
