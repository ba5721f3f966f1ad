#pragma once

// Stateless statistical core: portability metrics over per-platform
// efficiency samples, dispersion statistics, divergence metrics, and
// Roofline arithmetic. Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perfport/errors.hpp"

namespace perfport {

// One application-platform observation. Unsupported means the application
// does not run on that platform; such samples carry no value.
struct EfficiencySample {
    std::string platform_id;
    std::optional<double> value;  // fraction in (0,1] when supported
    bool supported = false;

    static EfficiencySample of(std::string platform, double efficiency) {
        return EfficiencySample{std::move(platform), efficiency, true};
    }
    static EfficiencySample unsupported_on(std::string platform) {
        return EfficiencySample{std::move(platform), std::nullopt, false};
    }
};

enum class PortabilityMetric { arithmetic, harmonic_strict, harmonic_supported };

struct PortabilityScore {
    double value = 0.0;  // fraction in [0,1]
    PortabilityMetric metric = PortabilityMetric::arithmetic;
    std::size_t platform_count_total = 0;      // |H|
    std::size_t platform_count_supported = 0;  // |S|
};

// Standard deviations of the per-platform efficiencies, in percentage points.
// sd_am pairs with the arithmetic-mean score, sd_hm with the harmonic one.
struct DispersionPair {
    double sd_am = 0.0;
    double sd_hm = 0.0;
};

struct RooflineSpec {
    double peak_flops = 0.0;      // GFLOP/s
    double peak_bandwidth = 0.0;  // GB/s

    // Ridge point of the roofline, FLOP/byte.
    double machine_balance() const { return peak_flops / peak_bandwidth; }
};

enum class Boundedness { compute_bound, memory_bound };

namespace detail {

inline void check_samples(const std::vector<EfficiencySample>& samples) {
    for (const auto& s : samples) {
        if (s.supported) {
            if (!s.value.has_value() || !(*s.value > 0.0) || *s.value > 1.0)
                throw DomainError("efficiency sample for platform '" + s.platform_id +
                                  "' must lie in (0, 1]");
        } else if (s.value.has_value()) {
            throw DomainError("unsupported sample for platform '" + s.platform_id +
                              "' must not carry a value");
        }
    }
}

inline std::vector<double> supported_values(const std::vector<EfficiencySample>& samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        if (s.supported) out.push_back(*s.value);
    return out;
}

inline double mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

inline double harmonic_mean(const std::vector<double>& v) {
    double recip_sum = 0.0;
    for (double x : v) recip_sum += 1.0 / x;
    return static_cast<double>(v.size()) / recip_sum;
}

}  // namespace detail

// Arithmetic-mean portability over the supported subset S; 0 when S is empty.
inline PortabilityScore arithmetic_pp(const std::vector<EfficiencySample>& samples) {
    detail::check_samples(samples);
    const auto vals = detail::supported_values(samples);
    PortabilityScore score;
    score.metric = PortabilityMetric::arithmetic;
    score.platform_count_total = samples.size();
    score.platform_count_supported = vals.size();
    score.value = vals.empty() ? 0.0 : detail::mean(vals);
    return score;
}

enum class HarmonicMode { strict, supported };

// Harmonic-mean portability. Strict mode scores 0 as soon as any platform in
// the set is unsupported; supported mode averages over S only.
inline PortabilityScore harmonic_pp(const std::vector<EfficiencySample>& samples,
                                    HarmonicMode mode) {
    detail::check_samples(samples);
    const auto vals = detail::supported_values(samples);
    PortabilityScore score;
    score.metric = mode == HarmonicMode::strict ? PortabilityMetric::harmonic_strict
                                                : PortabilityMetric::harmonic_supported;
    score.platform_count_total = samples.size();
    score.platform_count_supported = vals.size();
    if (vals.empty() || (mode == HarmonicMode::strict && vals.size() != samples.size())) {
        score.value = 0.0;
        return score;
    }
    score.value = detail::harmonic_mean(vals);
    return score;
}

// Dispersion of the supported efficiencies, expressed in percentage points.
// sd_am is the population (divisor N) standard deviation of the efficiency
// percentages. sd_hm is HM^2 times the sample (divisor N-1) standard
// deviation of their reciprocals, the delta-method dispersion of a harmonic
// mean, with HM in percent.
inline DispersionPair dispersion(const std::vector<EfficiencySample>& samples) {
    detail::check_samples(samples);
    auto vals = detail::supported_values(samples);
    if (vals.empty()) throw DomainError("dispersion requires at least one supported sample");
    for (double& v : vals) v *= 100.0;
    if (vals.size() == 1) return {0.0, 0.0};

    const double am = detail::mean(vals);
    double ss = 0.0;
    for (double v : vals) ss += (v - am) * (v - am);
    const double sd_am = std::sqrt(ss / static_cast<double>(vals.size()));

    std::vector<double> recips(vals.size());
    std::transform(vals.begin(), vals.end(), recips.begin(),
                   [](double v) { return 1.0 / v; });
    const double rmean = detail::mean(recips);
    double rss = 0.0;
    for (double r : recips) rss += (r - rmean) * (r - rmean);
    const double sd_recip = std::sqrt(rss / static_cast<double>(recips.size() - 1));
    const double hm = detail::harmonic_mean(vals);
    return {sd_am, hm * hm * sd_recip};
}

// Relative performance error against the same-platform, same-input-size
// baseline: 0 means the baseline itself.
inline double performance_distance(double achieved_efficiency) {
    if (!(achieved_efficiency > 0.0) || achieved_efficiency > 1.0)
        throw DomainError("achieved efficiency must lie in (0, 1]");
    return 1.0 - achieved_efficiency;
}

// Root mean square of performance distances across input sizes.
inline double rms_divergence(const std::vector<double>& distances) {
    if (distances.empty()) throw DomainError("rms_divergence requires at least one distance");
    double ss = 0.0;
    for (double d : distances) {
        if (d < 0.0) throw DomainError("performance distance must be non-negative");
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(distances.size()));
}

// Arithmetic mean of per-platform RMS divergences (the P_D metric).
inline double pd_metric(const std::vector<double>& per_platform_divergences) {
    if (per_platform_divergences.empty())
        throw DomainError("pd_metric requires at least one platform divergence");
    for (double d : per_platform_divergences)
        if (d < 0.0) throw DomainError("RMS divergence must be non-negative");
    return detail::mean(per_platform_divergences);
}

// Harmonic mean of component speedups contributed by non-portable code
// on one platform (the PP_MD metric).
inline double pp_md(const std::vector<double>& component_speedups) {
    if (component_speedups.empty())
        throw DomainError("pp_md requires at least one component speedup");
    for (double s : component_speedups)
        if (!(s > 0.0)) throw DomainError("component speedup must be positive");
    return detail::harmonic_mean(component_speedups);
}

// Attainable throughput at the given arithmetic intensity:
// min(peak FLOP rate, ai * peak bandwidth), GFLOP/s. At or beyond the ridge
// point the flat roof is attained exactly, matching classify_bound's tie.
inline double roofline_attainable(double ai, const RooflineSpec& spec) {
    if (!(ai > 0.0)) throw DomainError("arithmetic intensity must be positive");
    if (!(spec.peak_flops > 0.0) || !(spec.peak_bandwidth > 0.0))
        throw DomainError("roofline peaks must be positive");
    if (ai >= spec.machine_balance()) return spec.peak_flops;
    return std::min(spec.peak_flops, ai * spec.peak_bandwidth);
}

// Compute-bound at or beyond the ridge point (the ridge attains peak FLOP/s),
// memory-bound below it.
inline Boundedness classify_bound(double ai, const RooflineSpec& spec) {
    if (!(ai > 0.0)) throw DomainError("arithmetic intensity must be positive");
    if (!(spec.peak_flops > 0.0) || !(spec.peak_bandwidth > 0.0))
        throw DomainError("roofline peaks must be positive");
    return ai >= spec.machine_balance() ? Boundedness::compute_bound
                                        : Boundedness::memory_bound;
}

}  // namespace perfport
