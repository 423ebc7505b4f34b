#include "solvcert/pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace solvcert {

const char* to_string(PfStatus s) {
    switch (s) {
        case PfStatus::converged: return "converged";
        case PfStatus::max_iterations: return "max_iterations";
        case PfStatus::stalled: return "stalled";
        case PfStatus::singular_jacobian: return "singular_jacobian";
    }
    return "unknown";
}

namespace {

void check_dims(const NetworkModel& model, std::size_t a, std::size_t b) {
    if (a != model.n || b != model.n) throw std::invalid_argument("power flow: dimension mismatch");
}

// Current injections Y (V - V0).
CVector currents(const NetworkModel& model, std::span<const Complex> v) {
    CVector dv(model.n);
    for (std::size_t i = 0; i < model.n; ++i) dv[i] = v[i] - model.v_zero[i];
    return model.y * dv;
}

bool has_zero(std::span<const Complex> v) {
    return std::any_of(v.begin(), v.end(), [](const Complex& x) { return x == Complex{}; });
}

bool all_finite(std::span<const Complex> v) {
    return std::all_of(v.begin(), v.end(), [](const Complex& x) { return detail::is_finite(x); });
}

}  // namespace

CVector pf_residual(const NetworkModel& model, std::span<const Complex> v, std::span<const Complex> s) {
    check_dims(model, v.size(), s.size());
    if (has_zero(v)) throw std::invalid_argument("pf_residual: zero voltage component");
    const CVector cur = currents(model, v);
    CVector out(model.n);
    for (std::size_t i = 0; i < model.n; ++i) out[i] = v[i] * std::conj(cur[i]) - s[i];
    return out;
}

PFSolution newton_pf(const NetworkModel& model, std::span<const Complex> s, std::span<const Complex> v_init,
                     const NewtonOptions& opts) {
    check_dims(model, s.size(), v_init.size());
    if (!(opts.tol > 0)) throw std::invalid_argument("newton_pf: tol must be positive");
    if (has_zero(v_init)) throw std::invalid_argument("newton_pf: initial voltage has a zero component");

    const std::size_t n = model.n;
    PFSolution sol;
    sol.v.assign(v_init.begin(), v_init.end());
    CVector f = pf_residual(model, sol.v, s);
    double norm = inf_norm(f);

    RealMatrix jac(2 * n, 2 * n);
    std::vector<double> rhs(2 * n);
    CVector trial(n);
    for (;;) {
        sol.final_mismatch = norm;
        if (norm <= opts.tol) {
            sol.converged = true;
            sol.status = PfStatus::converged;
            return sol;
        }
        if (sol.iterations >= opts.max_iter) {
            sol.status = PfStatus::max_iterations;
            return sol;
        }

        // df = diag(conj I) dV + diag(V) conj(Y) conj(dV); split dV = dVr + j dVi.
        const CVector cur = currents(model, sol.v);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const Complex b = sol.v[i] * std::conj(model.y(i, k));
                const Complex a = i == k ? std::conj(cur[i]) : Complex{};
                const Complex d_re = a + b;                   // df_i / dVr_k
                const Complex d_im = Complex(0.0, 1.0) * (a - b);  // df_i / dVi_k
                jac(i, k) = d_re.real();
                jac(i, n + k) = d_im.real();
                jac(n + i, k) = d_re.imag();
                jac(n + i, n + k) = d_im.imag();
            }
            rhs[i] = -f[i].real();
            rhs[n + i] = -f[i].imag();
        }
        std::vector<double> dx;
        try {
            dx = LuFactorization<double>(jac).solve(rhs);
        } catch (const SingularMatrixError&) {
            sol.status = PfStatus::singular_jacobian;
            return sol;
        }
        ++sol.iterations;

        double step = opts.initial_step;
        bool accepted = false;
        for (std::size_t h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = sol.v[i] + step * Complex(dx[i], dx[n + i]);
            if (has_zero(trial) || !all_finite(trial)) continue;
            CVector ft = pf_residual(model, trial, s);
            const double nt = inf_norm(ft);
            if (nt < norm) {
                sol.v = trial;
                f = std::move(ft);
                norm = nt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            sol.status = PfStatus::stalled;
            return sol;
        }
    }
}

PFSolution solve_pf(const NetworkModel& model, std::span<const Complex> s, const NewtonOptions& opts) {
    PFSolution sol = newton_pf(model, s, model.v_zero, opts);
    if (!sol.converged)
        throw NonConvergenceError(std::string("Newton power flow did not converge (") + to_string(sol.status) +
                                      ")",
                                  sol.v, sol.final_mismatch);
    return sol;
}

PFSolution continuation_solve(const NetworkModel& model, std::span<const Complex> s_target, double min_step,
                              const NewtonOptions& opts, std::size_t* newton_calls) {
    check_dims(model, s_target.size(), s_target.size());
    PFSolution last;
    last.v = model.v_zero;
    last.converged = true;
    last.status = PfStatus::converged;
    double t = 0.0;
    double step = 1.0;
    CVector s(model.n);
    std::size_t total_iter = 0;
    while (t < 1.0) {
        const double target = std::min(1.0, t + step);
        for (std::size_t i = 0; i < model.n; ++i) s[i] = target * s_target[i];
        PFSolution sol = newton_pf(model, s, last.v, opts);
        if (newton_calls) ++*newton_calls;
        total_iter += sol.iterations;
        if (sol.converged) {
            t = target;
            last = std::move(sol);
            step *= 2.0;
        } else {
            step *= 0.5;
            if (step < min_step) {
                sol.iterations = total_iter;
                sol.converged = false;
                return sol;
            }
        }
    }
    last.iterations = total_iter;
    return last;
}

PFSolution solve_with_fallback(const NetworkModel& model, std::span<const Complex> s,
                               std::span<const CVector> starts, const NewtonOptions& opts) {
    PFSolution sol = newton_pf(model, s, model.v_zero, opts);
    if (sol.converged) return sol;
    for (const auto& start : starts) {
        sol = newton_pf(model, s, start, opts);
        if (sol.converged) return sol;
    }
    NewtonOptions damped = opts;
    damped.initial_step = 0.5;
    damped.max_iter = 2 * opts.max_iter;
    sol = newton_pf(model, s, model.v_zero, damped);
    if (sol.converged) return sol;
    return continuation_solve(model, s, 1e-4, opts);
}

namespace {

CVector ray_point(std::span<const Complex> base, std::span<const Complex> dir, double lambda) {
    CVector s(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) s[i] = base[i] + lambda * dir[i];
    return s;
}

void check_direction(std::span<const Complex> du) {
    const double norm = inf_norm(du);
    if (norm == 0.0) throw std::invalid_argument("loading direction is zero");
    if (std::abs(norm - 1.0) > 1e-9) throw std::invalid_argument("loading direction must have unit infinity norm");
}

constexpr double kMaxGain = 1e12;

}  // namespace

double loadability_limit(const NetworkModel& model, std::span<const Complex> s_star,
                         std::span<const Complex> du, const LoadabilityOptions& opts) {
    check_dims(model, s_star.size(), du.size());
    check_direction(du);
    if (!(opts.tol_rel > 0)) throw std::invalid_argument("loadability_limit: tol_rel must be positive");

    const PFSolution base = solve_with_fallback(model, s_star, std::span<const CVector>{}, opts.newton);
    if (!base.converged)
        throw NonConvergenceError("base injection of the loadability search is unsolvable", base.v,
                                  base.final_mismatch);

    const double first = inf_norm(s_star) + 1.0;

    if (opts.warm_start) {
        // Doubling until the first failure, then bisection between the last
        // converged gain (the warm start) and the smallest failed one.
        double lam = 0.0;
        double failed = std::numeric_limits<double>::infinity();
        CVector v = base.v;
        double step = first;
        while (step >= opts.tol_rel * std::max(lam, 1e-6 * first)) {
            const double target = lam + step;
            if (target > kMaxGain) return std::numeric_limits<double>::infinity();
            const CVector s = ray_point(s_star, du, target);
            PFSolution sol = newton_pf(model, s, v, opts.newton);
            if (sol.converged) {
                lam = target;
                v = std::move(sol.v);
                step = std::isinf(failed) ? 2.0 * step : 0.5 * (failed - lam);
            } else {
                failed = target;
                step *= 0.5;
            }
        }
        return lam;
    }

    auto solvable = [&](double lam) {
        const CVector s = ray_point(s_star, du, lam);
        for (const auto& start : {base.v, model.v_zero})
            if (newton_pf(model, s, start, opts.newton).converged) return true;
        return false;
    };
    double lo = 0.0;
    double hi = first;
    while (solvable(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxGain) return std::numeric_limits<double>::infinity();
    }
    while (hi - lo > opts.tol_rel * std::max(lo, 1e-6 * first)) {
        const double mid = 0.5 * (lo + hi);
        (solvable(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace solvcert
