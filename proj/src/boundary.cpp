#include "solvcert/boundary.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "parallel.hpp"

namespace solvcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxRadius = 1e12;

}  // namespace

bool twobus_certified(const TwoBusCase& c, double p, double q) {
    return std::sqrt((c.r * c.r + c.x * c.x) * (p * p + q * q)) <= 0.25;
}

bool twobus_real(const TwoBusCase& c, double p, double q) {
    const double t = c.r * q - c.x * p;
    return t * t + c.r * p + c.x * q <= 0.25;
}

double twobus_certified_radius(const TwoBusCase& c, double p, double q) {
    const double k = std::hypot(c.r, c.x) * std::hypot(p, q);
    return k > 0.0 ? 0.25 / k : kInf;
}

double twobus_real_radius(const TwoBusCase& c, double p, double q) {
    // alpha t^2 + beta t - 1/4 = 0, positive root in cancellation-free form.
    const double d = c.r * q - c.x * p;
    const double alpha = d * d;
    const double beta = c.r * p + c.x * q;
    const double den = beta + std::sqrt(beta * beta + alpha);
    return den > 0.0 ? 0.5 / den : kInf;
}

Plane homogeneous_plane(std::size_t n) {
    return Plane{CVector(n, Complex(-1.0, 0.0)), CVector(n, Complex(0.0, -1.0))};
}

CVector ray_direction(const Plane& plane, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    CVector d(plane.d1.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = c * plane.d1[i] + s * plane.d2[i];
    return d;
}

double certified_radius(const BasePoint& base, std::span<const Complex> d, std::optional<double> r,
                        double tol_rel) {
    if (d.size() != base.size()) throw std::invalid_argument("certified_radius: dimension mismatch");
    if (!(tol_rel > 0.0)) throw std::invalid_argument("certified_radius: tol_rel must be positive");
    if (r && !(*r > 0.0)) throw std::invalid_argument("certified_radius: r must be positive");
    const double dn = inf_norm(d);
    if (dn == 0.0) throw std::invalid_argument("certified_radius: zero direction");

    CVector s(base.size());
    auto passes = [&](double lambda) {
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = base.s_star[i] + lambda * d[i];
        return (r ? certify_within(base, s, *r) : certify(base, s)).passed;
    };
    // Rough scale from the direction-independent gain keeps doubling short.
    double lo = 0.0;
    double hi = 1.0 / dn;
    try {
        hi = (certified_admissible_gain(base).lambda_cag + 1.0) / dn;
    } catch (const Error&) {
    }
    while (passes(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxRadius) return kInf;
    }
    const double floor = 1e-12 * hi;
    while (hi - lo > tol_rel * std::max(lo, floor)) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo;
}

BoundaryTrace trace_boundary_2d(const BasePoint& base, const Plane& plane, const TraceOptions& opts) {
    const std::size_t n = base.size();
    if (plane.d1.size() != n || plane.d2.size() != n)
        throw std::invalid_argument("trace_boundary_2d: plane dimension mismatch");
    if (opts.n_rays < 4) throw std::invalid_argument("trace_boundary_2d: need at least 4 rays");
    // Degenerate when |<d1, d2>|^2 = |d1|^2 |d2|^2 (real inner product on C^n = R^2n).
    double g11 = 0.0, g22 = 0.0, g12 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g11 += std::norm(plane.d1[i]);
        g22 += std::norm(plane.d2[i]);
        g12 += (std::conj(plane.d1[i]) * plane.d2[i]).real();
    }
    if (!(g11 > 0.0 && g22 > 0.0) || g11 * g22 - g12 * g12 <= 1e-12 * g11 * g22)
        throw std::invalid_argument("trace_boundary_2d: degenerate plane");

    BoundaryTrace trace;
    trace.plane = plane;
    trace.r = opts.r;
    trace.tol_rel = opts.tol_rel;
    trace.rays.resize(opts.n_rays);
    detail::parallel_for(opts.n_rays, opts.threads, [&](std::size_t k) {
        BoundaryRay& ray = trace.rays[k];
        ray.theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(opts.n_rays);
        const CVector d = ray_direction(plane, ray.theta);
        ray.certified_radius = certified_radius(base, d, opts.r, opts.tol_rel);
        if (opts.with_true) {
            const double dn = inf_norm(d);
            CVector unit(d);
            for (auto& x : unit) x /= dn;
            ray.true_radius = loadability_limit(*base.model, base.s_star, unit, opts.loadability) / dn;
            if (*ray.true_radius > 0.0) ray.covering_ratio = ray.certified_radius / *ray.true_radius;
        }
    });
    return trace;
}

CoalescenceScan coalescence_scan(const BasePoint& base, std::span<const double> power_factors,
                                 const LoadabilityOptions& opts) {
    if (power_factors.empty()) throw std::invalid_argument("coalescence_scan: empty power-factor grid");
    CoalescenceScan scan;
    for (double pf : power_factors) {
        if (!(pf > 0.0 && pf <= 1.0)) throw std::invalid_argument("coalescence_scan: power factor outside (0, 1]");
        const CVector du = homogeneous_direction(base.size(), pf);
        CoalescenceRow row;
        row.cos_phi = pf;
        const double sin_phi = std::sqrt(std::max(0.0, 1.0 - pf * pf));
        row.cot_phi = sin_phi > 0.0 ? pf / sin_phi : kInf;
        row.lambda_b = certified_gain_direction(base, du, opts.tol_rel);
        row.lambda_r = loadability_limit(*base.model, base.s_star, du, opts);
        row.covering_ratio = row.lambda_r > 0.0 ? row.lambda_b / row.lambda_r : 0.0;
        scan.rows.push_back(row);
    }
    for (std::size_t i = 1; i < scan.rows.size(); ++i)
        if (scan.rows[i].covering_ratio > scan.rows[scan.best].covering_ratio) scan.best = i;
    return scan;
}

TimingTable runtime_scaling(std::span<const BasePoint> bases, std::size_t repetitions, std::uint64_t seed) {
    if (repetitions == 0) throw std::invalid_argument("runtime_scaling: repetitions must be at least 1");
    TimingTable table;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const std::size_t warmup = repetitions / 10;
    for (const auto& base : bases) {
        // Small perturbations of s*, fixed before timing starts.
        const double scale = 0.1 * (inf_norm(base.s_star) + 1e-3);
        std::vector<CVector> points(repetitions, base.s_star);
        for (auto& p : points)
            for (auto& x : p) x += scale * Complex(unit(rng), unit(rng));

        double total = 0.0;
        double sink = 0.0;
        for (std::size_t k = 0; k < repetitions; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            sink += certify(base, points[k]).lhs;
            const auto t1 = std::chrono::steady_clock::now();
            if (k >= warmup) total += std::chrono::duration<double>(t1 - t0).count();
        }
        volatile double keep = sink;
        (void)keep;
        table.rows.push_back({base.size(), total / static_cast<double>(repetitions - warmup)});
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (const auto& row : table.rows) {
        if (row.mean_seconds <= 0.0) continue;
        const double x = std::log(static_cast<double>(row.n));
        const double y = std::log(row.mean_seconds);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++m;
    }
    const double den = static_cast<double>(m) * sxx - sx * sx;
    if (m >= 2 && den > 1e-12) table.loglog_slope = (static_cast<double>(m) * sxy - sx * sy) / den;
    return table;
}

}  // namespace solvcert
