#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "solvcert/cert.hpp"
#include "solvcert/netmodel.hpp"

namespace solvcert {

/// How a cloud of injections is drawn around a base injection.
struct SamplingSpec {
    /// Half-width of the uniform range as a fraction of |s_base_i| (5.0 = ±500 %).
    double range = 5.0;
    /// Internal indices of the varied buses; empty means every PQ bus.
    std::vector<std::size_t> varied;
    std::size_t count = 1000;
};

struct InjectionCloud {
    std::vector<CVector> points;
    std::uint64_t seed = 0;
    SamplingSpec spec;
    CVector base;
};

/// Draws `spec.count` injections: for each varied bus, P and Q independently
/// uniform in base ± range·|base_i|; other buses stay at the base value.
/// Deterministic for a fixed seed.
InjectionCloud sample_injections(const NetworkModel& model, std::span<const Complex> base,
                                 const SamplingSpec& spec, std::uint64_t seed);

enum class PointClass { solvable_seed, certified, insolvable };

struct PointOutcome {
    PointClass cls = PointClass::insolvable;
    /// Index of the seed that certified the point (or the point itself when it
    /// was a solved seed).
    std::optional<std::size_t> seed;
    /// Certificate value against the certifying seed, when certified.
    std::optional<double> lhs;
};

struct ScreenResult {
    std::vector<std::size_t> solvable;
    std::vector<std::size_t> insolvable;
    std::vector<std::size_t> seeds_used;
    std::vector<PointOutcome> outcomes;
    std::size_t pf_calls = 0;
    std::size_t certificate_calls = 0;
    /// Points classified insolvable only because every solve strategy failed.
    std::size_t unverified_insolvable = 0;
    std::chrono::duration<double> wall_time{};
};

struct ScreenOptions {
    /// Worker threads for certifying remaining points against a seed.
    std::size_t threads = 1;
    NewtonOptions newton{};
};

/// Seed-and-certify screening: take the first remaining point as a seed, solve
/// it, certify every remaining point against it with the r-free certificate,
/// and repeat until the cloud is exhausted.
ScreenResult fast_screen(std::shared_ptr<const NetworkModel> model, const InjectionCloud& cloud,
                         const ScreenOptions& opts = {});

/// One independent power-flow classification per point.
ScreenResult brute_screen(const NetworkModel& model, const InjectionCloud& cloud, const ScreenOptions& opts = {});

/// Fraction of the cloud certified by a single base point. No power flows.
double solvability_index(const BasePoint& base, const InjectionCloud& cloud, std::size_t threads = 1);

}  // namespace solvcert
