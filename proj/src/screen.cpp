#include "solvcert/screen.hpp"

#include <algorithm>
#include <random>

#include "parallel.hpp"

namespace solvcert {

InjectionCloud sample_injections(const NetworkModel& model, std::span<const Complex> base,
                                 const SamplingSpec& spec, std::uint64_t seed) {
    if (base.size() != model.n) throw std::invalid_argument("sample_injections: base dimension mismatch");
    if (!std::isfinite(spec.range) || spec.range < 0.0)
        throw std::invalid_argument("sample_injections: range must be finite and non-negative");
    std::vector<std::size_t> varied = spec.varied;
    if (varied.empty())
        for (std::size_t i = 0; i < model.n; ++i) varied.push_back(i);
    for (auto i : varied)
        if (i >= model.n) throw std::invalid_argument("sample_injections: varied bus index out of range");

    InjectionCloud cloud;
    cloud.seed = seed;
    cloud.spec = spec;
    cloud.spec.varied = varied;
    cloud.base.assign(base.begin(), base.end());
    cloud.points.reserve(spec.count);

    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    for (std::size_t k = 0; k < spec.count; ++k) {
        CVector p = cloud.base;
        for (auto i : varied) {
            const double span = spec.range * std::abs(base[i]);
            const double dp = unit() * span;
            const double dq = unit() * span;
            p[i] += Complex(dp, dq);
        }
        cloud.points.push_back(std::move(p));
    }
    return cloud;
}

namespace {

std::vector<CVector> warm_starts(const NetworkModel& model, const InjectionCloud& cloud,
                                 const NewtonOptions& opts) {
    PFSolution base = newton_pf(model, cloud.base, model.v_zero, opts);
    if (base.converged) return {std::move(base.v)};
    return {};
}

// Builds a base point at a solved seed; nullopt when the certificate is not
// defined there (singular J*).
std::optional<BasePoint> seed_base_point(const std::shared_ptr<const NetworkModel>& model,
                                         const PFSolution& sol, std::span<const Complex> s,
                                         const NewtonOptions& opts) {
    NewtonOptions tight = opts;
    tight.tol = 1e-12;
    tight.max_iter = 10;
    PFSolution polished = newton_pf(*model, s, sol.v, tight);
    const CVector& v = polished.final_mismatch < sol.final_mismatch ? polished.v : sol.v;
    try {
        return base_point_from_solution(model, v, s);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void finalize(ScreenResult& res) {
    for (std::size_t i = 0; i < res.outcomes.size(); ++i)
        (res.outcomes[i].cls == PointClass::insolvable ? res.insolvable : res.solvable).push_back(i);
}

}  // namespace

ScreenResult fast_screen(std::shared_ptr<const NetworkModel> model, const InjectionCloud& cloud,
                         const ScreenOptions& opts) {
    if (!model) throw std::invalid_argument("fast_screen: null model");
    const auto t0 = std::chrono::steady_clock::now();
    ScreenResult res;
    const std::size_t count = cloud.points.size();
    res.outcomes.resize(count);
    const auto starts = warm_starts(*model, cloud, opts.newton);

    std::vector<std::size_t> remaining(count);
    for (std::size_t i = 0; i < count; ++i) remaining[i] = i;
    std::size_t head = 0;

    while (head < remaining.size()) {
        const std::size_t seed = remaining[head++];
        const CVector& s_seed = cloud.points[seed];
        ++res.pf_calls;
        const PFSolution sol = solve_with_fallback(*model, s_seed, starts, opts.newton);
        if (!sol.converged) {
            res.outcomes[seed].cls = PointClass::insolvable;
            ++res.unverified_insolvable;
            continue;
        }
        res.outcomes[seed] = {PointClass::solvable_seed, seed, std::nullopt};
        res.seeds_used.push_back(seed);

        const auto base = seed_base_point(model, sol, s_seed, opts.newton);
        if (!base) continue;

        const std::size_t todo = remaining.size() - head;
        std::vector<double> lhs(todo);
        detail::parallel_for(todo, opts.threads, [&](std::size_t k) {
            lhs[k] = certify(*base, cloud.points[remaining[head + k]]).lhs;
        });
        res.certificate_calls += todo;

        // Keep input order among the points that stay uncertified.
        std::vector<std::size_t> next(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(head));
        for (std::size_t k = 0; k < todo; ++k) {
            const std::size_t idx = remaining[head + k];
            if (lhs[k] <= 1.0)
                res.outcomes[idx] = {PointClass::certified, seed, lhs[k]};
            else
                next.push_back(idx);
        }
        remaining = std::move(next);
    }
    finalize(res);
    res.wall_time = std::chrono::steady_clock::now() - t0;
    return res;
}

ScreenResult brute_screen(const NetworkModel& model, const InjectionCloud& cloud, const ScreenOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    ScreenResult res;
    const std::size_t count = cloud.points.size();
    res.outcomes.resize(count);
    const auto starts = warm_starts(model, cloud, opts.newton);
    std::vector<char> ok(count, 0);
    detail::parallel_for(count, opts.threads, [&](std::size_t i) {
        ok[i] = solve_with_fallback(model, cloud.points[i], starts, opts.newton).converged ? 1 : 0;
    });
    res.pf_calls = count;
    for (std::size_t i = 0; i < count; ++i) {
        if (ok[i]) {
            res.outcomes[i] = {PointClass::solvable_seed, i, std::nullopt};
        } else {
            res.outcomes[i].cls = PointClass::insolvable;
            ++res.unverified_insolvable;
        }
    }
    finalize(res);
    res.wall_time = std::chrono::steady_clock::now() - t0;
    return res;
}

double solvability_index(const BasePoint& base, const InjectionCloud& cloud, std::size_t threads) {
    if (cloud.points.empty()) throw std::invalid_argument("solvability_index: empty cloud");
    std::vector<char> pass(cloud.points.size(), 0);
    detail::parallel_for(cloud.points.size(), threads,
                         [&](std::size_t i) { pass[i] = certify(base, cloud.points[i]).passed ? 1 : 0; });
    const auto n = std::count(pass.begin(), pass.end(), 1);
    return static_cast<double>(n) / static_cast<double>(cloud.points.size());
}

}  // namespace solvcert
