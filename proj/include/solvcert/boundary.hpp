#pragma once

#include <optional>
#include <span>
#include <vector>

#include "solvcert/cert.hpp"

namespace solvcert {

/// Two-bus system: slack bus feeding one PQ bus through R + jX (p.u.).
struct TwoBusCase {
    double r = 0.0;
    double x = 0.0;
};

/// Certified region of the two-bus system, P and Q taken as consumption:
/// sqrt((R^2+X^2)(P^2+Q^2)) <= 1/4.
bool twobus_certified(const TwoBusCase& c, double p, double q);

/// Exact solvability of the two-bus system: (RQ - XP)^2 + RP + XQ <= 1/4.
bool twobus_real(const TwoBusCase& c, double p, double q);

/// Radius along a consumption direction (p, q) (any scale) at which each
/// two-bus region ends; infinity when the ray never leaves it.
double twobus_certified_radius(const TwoBusCase& c, double p, double q);
double twobus_real_radius(const TwoBusCase& c, double p, double q);

/// Affine injection plane origin + u·d1 + v·d2. The origin is always the
/// base injection s*.
struct Plane {
    CVector d1;
    CVector d2;
};

/// Total-P / total-Q slice: every PQ bus consumes one unit of P along d1 and
/// one unit of Q along d2.
Plane homogeneous_plane(std::size_t n);

struct BoundaryRay {
    double theta = 0.0;
    double certified_radius = 0.0;
    std::optional<double> true_radius;
    std::optional<double> covering_ratio;
};

struct BoundaryTrace {
    Plane plane;
    std::optional<double> r;
    double tol_rel = 1e-6;
    std::vector<BoundaryRay> rays;
};

struct TraceOptions {
    std::size_t n_rays = 180;
    /// Fixed voltage-bound radius; none selects the r-free certificate.
    std::optional<double> r;
    double tol_rel = 1e-6;
    bool with_true = false;
    std::size_t threads = 1;
    LoadabilityOptions loadability{};
};

/// Ray direction cos(theta)·d1 + sin(theta)·d2.
CVector ray_direction(const Plane& plane, double theta);

/// Largest lambda with s* + lambda·d certified (r-free, or the union of
/// fixed-radius regions up to r when given), by doubling and bisection.
/// Returns infinity when the ray is certified beyond 1e12.
double certified_radius(const BasePoint& base, std::span<const Complex> d, std::optional<double> r,
                        double tol_rel);

/// Traces rays at theta_k = 2 pi k / n_rays. Throws std::invalid_argument for
/// n_rays < 4 or linearly dependent plane directions.
BoundaryTrace trace_boundary_2d(const BasePoint& base, const Plane& plane, const TraceOptions& opts = {});

struct CoalescenceRow {
    double cos_phi = 0.0;
    double cot_phi = 0.0;
    double lambda_b = 0.0;
    double lambda_r = 0.0;
    double covering_ratio = 0.0;
};

struct CoalescenceScan {
    std::vector<CoalescenceRow> rows;
    /// Index of the row with the largest covering ratio.
    std::size_t best = 0;
};

/// Homogeneous loading at each power factor of the grid, covering ratio
/// lambda_B / lambda_R. Throws std::invalid_argument for an empty grid or a
/// value outside (0, 1].
CoalescenceScan coalescence_scan(const BasePoint& base, std::span<const double> power_factors,
                                 const LoadabilityOptions& opts = {});

struct TimingRow {
    std::size_t n = 0;
    double mean_seconds = 0.0;
};

struct TimingTable {
    std::vector<TimingRow> rows;
    /// Least-squares slope of log(time) against log(n); none with fewer than
    /// two distinct sizes.
    std::optional<double> loglog_slope;
};

/// Mean wall time of one r-free certificate against each prebuilt base point.
/// The first 10 % of the repetitions are discarded as warm-up.
TimingTable runtime_scaling(std::span<const BasePoint> bases, std::size_t repetitions, std::uint64_t seed = 1);

}  // namespace solvcert
