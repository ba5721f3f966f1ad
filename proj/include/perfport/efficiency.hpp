#pragma once

// The five performance-efficiency types: application approach (type 0 =
// base vs peak run of the same implementation, type 1 = vs best portable
// implementation, type 2 = vs best implementation of any kind) and
// architectural approach (type 0 = vs theoretical peak throughput, type 1 =
// vs Roofline-attainable throughput).
//
// Application-approach scores compare runtimes; architectural-approach
// scores compare throughputs. Raw ratios above 1 are clamped to 1 and
// flagged, never rejected.

#include <optional>
#include <string>

#include "perfport/errors.hpp"
#include "perfport/metrics.hpp"
#include "perfport/repository.hpp"

namespace perfport {

enum class Approach { application, architectural };

struct EfficiencyType {
    Approach approach = Approach::application;
    int type_no = 0;

    static EfficiencyType application(int type_no) {
        if (type_no < 0 || type_no > 2)
            throw DomainError("application efficiency admits types 0, 1, 2");
        return {Approach::application, type_no};
    }
    static EfficiencyType architectural(int type_no) {
        if (type_no < 0 || type_no > 1)
            throw DomainError("architectural efficiency admits types 0, 1");
        return {Approach::architectural, type_no};
    }

    // CLI spelling: app-0, app-1, app-2, arch-0, arch-1.
    static EfficiencyType parse(const std::string& s) {
        if (s == "app-0") return application(0);
        if (s == "app-1") return application(1);
        if (s == "app-2") return application(2);
        if (s == "arch-0") return architectural(0);
        if (s == "arch-1") return architectural(1);
        throw UsageError("unknown efficiency type '" + s +
                         "' (expected app-0|app-1|app-2|arch-0|arch-1)");
    }

    std::string name() const {
        return (approach == Approach::application ? "app-" : "arch-") + std::to_string(type_no);
    }

    friend bool operator==(const EfficiencyType&, const EfficiencyType&) = default;
};

struct EfficiencyScore {
    double value = 0.0;  // fraction in (0,1]
    EfficiencyType etype;
    bool clamped = false;  // raw ratio exceeded 1 before clamping
    std::optional<std::string> baseline_record;    // application approach
    std::optional<double> baseline_performance;    // architectural approach, GFLOP/s
};

namespace detail {

inline EfficiencyScore clamped_ratio(double raw, EfficiencyType etype) {
    EfficiencyScore score;
    score.etype = etype;
    score.clamped = raw > 1.0;
    score.value = score.clamped ? 1.0 : raw;
    return score;
}

}  // namespace detail

// Base metrics relative to peak metrics of the same application-platform
// pair (application type 0). Runtimes: lower is better, so the ratio is
// peak over base.
inline EfficiencyScore spec_efficiency(double base_seconds, double peak_seconds) {
    if (!(base_seconds > 0.0) || !(peak_seconds > 0.0))
        throw DomainError("runtimes must be positive");
    return detail::clamped_ratio(peak_seconds / base_seconds, EfficiencyType::application(0));
}

inline EfficiencyScore spec_efficiency(double base_seconds, const RunRecord& peak) {
    auto score = spec_efficiency(base_seconds, peak.median_seconds);
    score.baseline_record = peak.record_id;
    return score;
}

// Achieved runtime relative to the resolved best-known runtime on the same
// platform (application types 1 and 2).
inline EfficiencyScore app_efficiency(double achieved_seconds, double baseline_seconds,
                                      int type_no) {
    if (type_no != 1 && type_no != 2)
        throw DomainError("app_efficiency handles types 1 and 2; type 0 is spec_efficiency");
    if (!(achieved_seconds > 0.0) || !(baseline_seconds > 0.0))
        throw DomainError("runtimes must be positive");
    return detail::clamped_ratio(baseline_seconds / achieved_seconds,
                                 EfficiencyType::application(type_no));
}

inline EfficiencyScore app_efficiency(double achieved_seconds, const RunRecord& baseline,
                                      int type_no) {
    auto score = app_efficiency(achieved_seconds, baseline.median_seconds, type_no);
    score.baseline_record = baseline.record_id;
    return score;
}

// Achieved throughput relative to a platform peak: theoretical (type 0) or
// Roofline-attainable at the record's arithmetic intensity (type 1).
inline EfficiencyScore arch_efficiency(double achieved_throughput, const Platform& platform,
                                       int type_no, std::optional<double> ai = std::nullopt) {
    if (type_no != 0 && type_no != 1)
        throw DomainError("architectural efficiency admits types 0, 1");
    if (!(achieved_throughput > 0.0)) throw DomainError("achieved throughput must be positive");

    double peak = 0.0;
    if (type_no == 0) {
        if (!platform.peak_theoretical)
            throw ConfigError("platform '" + platform.platform_id +
                              "' has no theoretical peak throughput");
        peak = *platform.peak_theoretical;
    } else {
        if (!platform.roofline)
            throw ConfigError("platform '" + platform.platform_id + "' has no roofline data");
        if (!ai) throw ConfigError("architectural type 1 requires an arithmetic intensity");
        peak = roofline_attainable(*ai, *platform.roofline);
    }

    auto score = detail::clamped_ratio(achieved_throughput / peak,
                                       EfficiencyType::architectural(type_no));
    score.baseline_performance = peak;
    return score;
}

// Record with the minimum median runtime in the requested reference space;
// ties go to the earliest ingest. Scans the log directly — the baseline
// index is the separately maintained fast path (Snapshot::best_known).
inline const RunRecord& resolve_baseline(const Snapshot& snapshot,
                                         const std::string& application,
                                         const std::string& platform,
                                         const std::string& workload, ReferenceSpace space) {
    const RunRecord* best = nullptr;
    for (const auto& r : snapshot.records()) {
        if (r.application_id != application || r.platform_id != platform ||
            r.workload != workload || !eligible_for(r, space))
            continue;
        if (!best || r.median_seconds < best->median_seconds ||
            (r.median_seconds == best->median_seconds && r.ingest_seq < best->ingest_seq))
            best = &r;
    }
    if (!best)
        throw BaselineNotFound("no baseline for " +
                               BaselineKey{application, platform, workload, space}.describe());
    return *best;
}

}  // namespace perfport
