#pragma once

#include <cstddef>
#include <span>

#include "solvcert/linalg.hpp"
#include "solvcert/netmodel.hpp"

namespace solvcert {

enum class PfStatus { converged, max_iterations, stalled, singular_jacobian };

const char* to_string(PfStatus s);

struct PFSolution {
    CVector v;
    std::size_t iterations = 0;
    double final_mismatch = 0.0;
    bool converged = false;
    PfStatus status = PfStatus::max_iterations;
};

struct NewtonOptions {
    double tol = 1e-8;
    std::size_t max_iter = 50;
    std::size_t max_halvings = 30;
    /// Fraction of the Newton step tried first; halved on every rejection.
    double initial_step = 1.0;
};

/// diag(V) conj(Y (V - V0)) - s. Throws std::invalid_argument on a zero
/// voltage component or a dimension mismatch.
CVector pf_residual(const NetworkModel& model, std::span<const Complex> v, std::span<const Complex> s);

/// Damped Newton iteration on the real/imaginary split of the power-flow
/// equations. Never throws on failure; inspect `converged` / `status`.
PFSolution newton_pf(const NetworkModel& model, std::span<const Complex> s, std::span<const Complex> v_init,
                     const NewtonOptions& opts = {});

/// newton_pf from the zero-injection profile that throws NonConvergenceError
/// (carrying the last iterate) when it fails.
PFSolution solve_pf(const NetworkModel& model, std::span<const Complex> s, const NewtonOptions& opts = {});

/// Marches s(t) = t·s_target from the zero-injection solution to t = 1,
/// halving the step on every Newton failure. Gives up once the step falls
/// below `min_step` (as a fraction of the path). Counts Newton solves in
/// `newton_calls` when non-null.
PFSolution continuation_solve(const NetworkModel& model, std::span<const Complex> s_target,
                              double min_step = 1e-4, const NewtonOptions& opts = {},
                              std::size_t* newton_calls = nullptr);

/// Classification-grade solve used by the screeners: Newton from each start in
/// turn, a half-step damped retry from the zero-injection profile, and finally
/// continuation from zero injection. Starts may be empty.
PFSolution solve_with_fallback(const NetworkModel& model, std::span<const Complex> s,
                               std::span<const CVector> starts, const NewtonOptions& opts = {});

struct LoadabilityOptions {
    double tol_rel = 1e-6;
    /// Warm-started adaptive continuation (default) or cold-start bisection
    /// where every probe starts from the base solution and the flat profile.
    bool warm_start = true;
    NewtonOptions newton{};
};

/// Largest gain lambda for which s_star + lambda·du stays solvable along a
/// continuation path. `du` must have unit infinity norm.
///
/// Throws std::invalid_argument for a zero or non-normalized direction and
/// NonConvergenceError when the base injection itself cannot be solved.
double loadability_limit(const NetworkModel& model, std::span<const Complex> s_star,
                         std::span<const Complex> du, const LoadabilityOptions& opts = {});

}  // namespace solvcert
