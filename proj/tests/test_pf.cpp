#include "doctest.h"
#include "solvcert/boundary.hpp"
#include "solvcert/pf.hpp"
#include "test_util.hpp"

using namespace solvcert;
using namespace testutil;

namespace {

// Positive root |V| of V^4 + (2(RP+XQ) - 1) V^2 + (R^2+X^2)(P^2+Q^2) = 0 with
// P, Q consumption and slack voltage 1.
double biquadratic_vm(double r, double x, double p, double q) {
    const double b = 2 * (r * p + x * q) - 1;
    const double c = (r * r + x * x) * (p * p + q * q);
    const double disc = b * b - 4 * c;
    REQUIRE(disc >= 0);
    return std::sqrt((-b + std::sqrt(disc)) / 2);
}

}  // namespace

TEST_CASE("residual at the zero-injection profile") {
    for (const char* f : {"case2.m", "case33bw.m", "case141.m"}) {
        const auto m = model_of(f);
        CHECK(inf_norm(pf_residual(*m, m->v_zero, CVector(m->n))) == 0.0);
    }
    RawCase charged = load_case(data_path("case18.m"));
    for (auto& br : charged.branches) br.b = 0.01;
    const NetworkModel mc = build_network(charged, {true});
    double worst = 0;
    for (const auto& v : mc.v_zero) worst = std::max(worst, std::abs(v - mc.v0));
    CHECK(worst > 1e-6);  // charging lifts the profile
    CHECK(inf_norm(pf_residual(mc, mc.v_zero, CVector(mc.n))) < 1e-9);
}

TEST_CASE("two-bus residual with V equal to V0") {
    const auto m = model_of(two_bus_case(0.03, 0.04));
    const auto r = pf_residual(*m, CVector{1.0}, CVector{0.1});
    CHECK(std::abs(r[0] - Complex(-0.1, 0)) < 1e-15);
}

TEST_CASE("residual matches the scalar power balance") {
    const auto m = model_of("case33bw.m");
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        CVector v = rand_v(rng, m->n, 0.1);
        for (auto& x : v) x += 1.0;
        const CVector s = rand_v(rng, m->n);
        const CVector res = pf_residual(*m, v, s);
        for (std::size_t i = 0; i < m->n; ++i) {
            Complex acc{};
            for (std::size_t k = 0; k < m->n; ++k)
                acc += std::conj(m->y(i, k)) * v[i] * std::conj(v[k] - m->v_zero[k]);
            CHECK(std::abs(res[i] - (acc - s[i])) < 1e-12 * (1 + std::abs(acc)));
        }
    }
}

TEST_CASE("residual rejects zero voltages") {
    const auto m = model_of(two_bus_case(0.03, 0.04));
    CHECK_THROWS_AS(pf_residual(*m, CVector{0.0}, CVector{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(newton_pf(*m, CVector{0.0}, CVector{0.0}), std::invalid_argument);
}

TEST_CASE("Newton at zero injection") {
    const auto m = model_of("case69.m");
    const auto sol = newton_pf(*m, CVector(m->n), m->v_zero);
    CHECK(sol.converged);
    CHECK(sol.iterations <= 1);
}

TEST_CASE("two-bus Newton matches the biquadratic") {
    const double r = 0.03, x = 0.04;
    const auto m = model_of(two_bus_case(r, x));
    for (double lam : {0.1, 0.5, 1.0, 2.0, 3.0}) {
        const double p = 0.9 * lam, q = 0.436 * lam;
        const auto sol = solve_pf(*m, CVector{Complex(-p, -q)});
        CHECK(sol.final_mismatch <= 1e-8);
        CHECK(std::abs(sol.v[0]) == doctest::Approx(biquadratic_vm(r, x, p, q)).epsilon(1e-8));
    }
}

TEST_CASE("two-bus beyond the real boundary does not converge") {
    const TwoBusCase c{0.03, 0.04};
    const auto m = model_of(two_bus_case(c.r, c.x));
    const double p = 0.9 * 6, q = 0.436 * 6;
    REQUIRE_FALSE(twobus_real(c, p, q));
    CHECK_THROWS_AS(solve_pf(*m, CVector{Complex(-p, -q)}), NonConvergenceError);
    try {
        solve_pf(*m, CVector{Complex(-p, -q)});
    } catch (const NonConvergenceError& e) {
        CHECK(e.last_iterate().size() == 1);
        CHECK(e.mismatch() > 1e-8);
    }
    CHECK_FALSE(solve_with_fallback(*m, CVector{Complex(-p, -q)}, {}).converged);
}

TEST_CASE("fallback and continuation reach heavily loaded points") {
    const auto m = model_of("case33bw.m");
    CVector s = m->s_base;
    for (auto& x : s) x *= 3.0;
    const auto sol = solve_with_fallback(*m, s, {});
    REQUIRE(sol.converged);
    CHECK(inf_norm(pf_residual(*m, sol.v, s)) <= 1e-8);
    const auto cont = continuation_solve(*m, s);
    REQUIRE(cont.converged);
    CHECK(inf_norm(cont.v) == doctest::Approx(inf_norm(sol.v)).epsilon(1e-6));
}

TEST_CASE("two-bus loadability matches the analytic boundary") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ang(0, 2 * 3.14159265358979);
    for (int t = 0; t < 12; ++t) {
        const TwoBusCase c{0.01 + 0.05 * (t % 4), 0.02 + 0.03 * (t % 3)};
        const auto m = model_of(two_bus_case(c.r, c.x));
        const double th = ang(rng);
        // Consumption direction (p, q) scaled to unit infinity norm.
        const double p = std::cos(th), q = std::sin(th);
        const double expect = twobus_real_radius(c, p, q);
        if (!std::isfinite(expect) || expect > 1e6) continue;
        const double lam = loadability_limit(*m, CVector{0.0}, CVector{Complex(-p, -q)}, {1e-9});
        CHECK(lam == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("matching-ratio loadability") {
    const TwoBusCase c{0.03, 0.04};
    const auto m = model_of(two_bus_case(c.r, c.x));
    const double lam = loadability_limit(*m, CVector{0.0}, CVector{Complex(-0.6, -0.8)}, {1e-10});
    // Past the nose the smallest reachable mismatch is O(lambda - 5), so a
    // 1e-8 mismatch tolerance lets Newton accept points ~1e-9 beyond it.
    CHECK(lam == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(c.r * 0.6 * lam + c.x * 0.8 * lam == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("loadability direction checks") {
    const auto m = model_of(two_bus_case(0.03, 0.04));
    CHECK_THROWS_AS(loadability_limit(*m, CVector{0.0}, CVector{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(loadability_limit(*m, CVector{0.0}, CVector{Complex(-2, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(loadability_limit(*m, CVector{Complex(-50, 0)}, CVector{Complex(-1, 0)}), NonConvergenceError);
}

TEST_CASE("warm continuation and cold bisection agree") {
    const double tol = 1e-7;
    for (const char* f : {"case2.m", "case18.m", "case33bw.m"}) {
        const auto m = model_of(f);
        CVector s0 = m->s_base;
        if (m->n == 1) s0[0] = Complex(-1.0, -0.5);
        const CVector du = homogeneous_direction(m->n, 0.9);
        LoadabilityOptions warm{tol, true, {}}, cold{tol, false, {}};
        const double a = loadability_limit(*m, s0, du, warm);
        const double b = loadability_limit(*m, s0, du, cold);
        CHECK(std::abs(a - b) <= 2 * tol * std::max(a, b));
    }
}
