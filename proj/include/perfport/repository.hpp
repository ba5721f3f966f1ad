#pragma once

// Rule-enforcing store of run records and platforms. Records are kept in an
// append-only line-delimited JSON log; a baseline index per
// (application, platform, workload, reference space) is maintained
// incrementally on ingest and can be rebuilt from scratch from the log.
//
// Concurrency: single writer, many readers. State is an immutable value
// behind a shared_ptr; ingest builds the successor state and swaps it in,
// so a snapshot always sees a full pre- or post-ingest state.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfport/errors.hpp"
#include "perfport/metrics.hpp"

namespace perfport {

enum class ArchClass { cpu, gpu, other };
enum class OptLevel { base, peak };

inline std::string to_string(ArchClass c) {
    switch (c) {
        case ArchClass::cpu: return "cpu";
        case ArchClass::gpu: return "gpu";
        default: return "other";
    }
}

inline std::string to_string(OptLevel l) {
    return l == OptLevel::base ? "base" : "peak";
}

inline ArchClass arch_class_from_string(const std::string& s) {
    if (s == "cpu") return ArchClass::cpu;
    if (s == "gpu") return ArchClass::gpu;
    if (s == "other") return ArchClass::other;
    throw UsageError("unknown architecture class '" + s + "'");
}

inline OptLevel level_from_string(const std::string& s) {
    if (s == "base") return OptLevel::base;
    if (s == "peak") return OptLevel::peak;
    throw UsageError("unknown optimization level '" + s + "'");
}

struct Platform {
    std::string platform_id;
    std::string name;
    ArchClass arch_class = ArchClass::cpu;
    int cores = 0;
    int chips = 0;
    int cores_per_chip = 0;
    std::optional<double> peak_theoretical;  // GFLOP/s
    std::optional<RooflineSpec> roofline;

    friend bool operator==(const Platform& a, const Platform& b) {
        auto roof = [](const std::optional<RooflineSpec>& r) {
            return r ? std::optional<std::pair<double, double>>({r->peak_flops, r->peak_bandwidth})
                     : std::nullopt;
        };
        return a.platform_id == b.platform_id && a.name == b.name &&
               a.arch_class == b.arch_class && a.cores == b.cores && a.chips == b.chips &&
               a.cores_per_chip == b.cores_per_chip && a.peak_theoretical == b.peak_theoretical &&
               roof(a.roofline) == roof(b.roofline);
    }
};

// One measured benchmark execution. record_id, median_seconds and ingest_seq
// are assigned by the store, absent on input.
struct RunRecord {
    std::string record_id;
    std::string application_id;
    std::string suite_id;
    std::string platform_id;
    std::string model;  // programming model / framework, e.g. "OpenMP 3.1"
    bool portable = true;
    OptLevel level = OptLevel::base;
    std::string workload;
    int threads = 0;
    std::vector<double> run_seconds;  // 1 to 3 runs
    double median_seconds = 0.0;
    std::optional<double> achieved_throughput;   // GFLOP/s
    std::optional<double> arithmetic_intensity;  // FLOP/byte
    std::map<std::string, std::string> disclosure;
    std::uint64_t ingest_seq = 0;
    std::optional<std::string> supersedes;  // record_id this one supersedes
};

// Reference space a baseline is resolved in. same_impl_peak feeds the
// base-vs-peak efficiency, portable_any the best portable implementation,
// any_impl the best implementation of any kind.
enum class ReferenceSpace { same_impl_peak, portable_any, any_impl };

inline std::string to_string(ReferenceSpace s) {
    switch (s) {
        case ReferenceSpace::same_impl_peak: return "same_impl_peak";
        case ReferenceSpace::portable_any: return "portable_any";
        default: return "any_impl";
    }
}

constexpr ReferenceSpace kAllSpaces[] = {ReferenceSpace::same_impl_peak,
                                         ReferenceSpace::portable_any,
                                         ReferenceSpace::any_impl};

struct BaselineKey {
    std::string application_id;
    std::string platform_id;
    std::string workload;
    ReferenceSpace space = ReferenceSpace::any_impl;

    friend bool operator<(const BaselineKey& a, const BaselineKey& b) {
        return std::tie(a.application_id, a.platform_id, a.workload, a.space) <
               std::tie(b.application_id, b.platform_id, b.workload, b.space);
    }
    friend bool operator==(const BaselineKey& a, const BaselineKey& b) {
        return std::tie(a.application_id, a.platform_id, a.workload, a.space) ==
               std::tie(b.application_id, b.platform_id, b.workload, b.space);
    }
    std::string describe() const {
        return "(" + application_id + ", " + platform_id + ", " + workload + ", " +
               to_string(space) + ")";
    }
};

struct BaselineEntry {
    std::string best_record;
    double best_seconds = 0.0;
    std::uint64_t best_seq = 0;  // tie-break: earliest ingest wins
};

using BaselineIndex = std::map<BaselineKey, BaselineEntry>;

struct BaselineChange {
    BaselineKey key;
    std::optional<double> old_best_seconds;
    double new_best_seconds = 0.0;
    std::string new_best_record;
};

struct IngestResult {
    std::string record_id;
    std::uint64_t ingest_seq = 0;
    std::vector<BaselineChange> baseline_changes;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const {
        std::string out;
        for (const auto& v : violations) {
            if (!out.empty()) out += "; ";
            out += v;
        }
        return out;
    }
};

// Ingest rejected by validation; carries the full violation list.
struct ValidationError : Error {
    explicit ValidationError(ValidationReport r)
        : Error("record validation failed: " + r.joined()), report(std::move(r)) {}
    ValidationReport report;
};

// Median of 1-3 runs: the middle of three, the single value, or the mean of
// two (the reporting rule only defines the three-run case).
inline double median_of_runs(const std::vector<double>& runs) {
    if (runs.empty() || runs.size() > 3)
        throw ValidationError(ValidationReport{{"run count must be between 1 and 3"}});
    for (double r : runs)
        if (!(r > 0.0)) throw ValidationError(ValidationReport{{"non-positive runtime"}});
    if (runs.size() == 1) return runs[0];
    if (runs.size() == 2) return (runs[0] + runs[1]) / 2.0;
    std::vector<double> sorted = runs;
    std::sort(sorted.begin(), sorted.end());
    return sorted[1];
}

// Checks a record against the reporting rules. Collects every violation
// instead of stopping at the first.
inline ValidationReport validate_record(const RunRecord& r,
                                        const std::map<std::string, Platform>& known_platforms) {
    ValidationReport report;
    auto add = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (r.application_id.empty()) add("missing application_id");
    if (r.platform_id.empty())
        add("missing platform_id");
    else if (!known_platforms.count(r.platform_id))
        add("unknown platform '" + r.platform_id + "'");
    if (r.workload.empty()) add("missing workload");
    if (r.model.empty()) add("missing model");
    if (r.threads < 1) add("thread count must be positive");
    if (r.run_seconds.empty() || r.run_seconds.size() > 3)
        add("run count must be between 1 and 3");
    for (double s : r.run_seconds)
        if (!(s > 0.0)) {
            add("non-positive runtime");
            break;
        }
    if (!r.portable && r.level == OptLevel::peak)
        add("non-portable record cannot carry peak level");
    for (const char* key : {"compiler", "flags"})
        if (!r.disclosure.count(key)) add(std::string("missing disclosure key '") + key + "'");
    if (r.achieved_throughput && !(*r.achieved_throughput > 0.0))
        add("non-positive achieved_throughput");
    if (r.arithmetic_intensity && !(*r.arithmetic_intensity > 0.0))
        add("non-positive arithmetic_intensity");
    return report;
}

// Reference spaces a record's runtime competes in.
inline bool eligible_for(const RunRecord& r, ReferenceSpace space) {
    switch (space) {
        case ReferenceSpace::same_impl_peak: return r.level == OptLevel::peak;
        case ReferenceSpace::portable_any: return r.portable;
        case ReferenceSpace::any_impl: return true;
    }
    return false;
}

// Brute-force index rebuild straight from the record log. Kept independent
// of the incremental maintenance in ingest; the two are cross-checked.
inline BaselineIndex rebuild_baseline_index(const std::vector<RunRecord>& records) {
    BaselineIndex index;
    for (ReferenceSpace space : kAllSpaces) {
        for (const auto& r : records) {
            if (!eligible_for(r, space)) continue;
            BaselineKey key{r.application_id, r.platform_id, r.workload, space};
            auto it = index.find(key);
            bool better = it == index.end() || r.median_seconds < it->second.best_seconds ||
                          (r.median_seconds == it->second.best_seconds &&
                           r.ingest_seq < it->second.best_seq);
            if (better) index[key] = BaselineEntry{r.record_id, r.median_seconds, r.ingest_seq};
        }
    }
    return index;
}

struct RecordFilter {
    std::optional<std::string> application_id;
    std::optional<std::string> suite_id;
    std::optional<std::string> platform_id;
    std::optional<std::string> model;
    std::optional<std::string> workload;
    std::optional<OptLevel> level;
    std::optional<bool> portable;

    bool matches(const RunRecord& r) const {
        if (application_id && r.application_id != *application_id) return false;
        if (suite_id && r.suite_id != *suite_id) return false;
        if (platform_id && r.platform_id != *platform_id) return false;
        if (model && r.model != *model) return false;
        if (workload && r.workload != *workload) return false;
        if (level && r.level != *level) return false;
        if (portable && r.portable != *portable) return false;
        return true;
    }
};

// --- JSON wire format -------------------------------------------------------

inline void to_json(nlohmann::json& j, const Platform& p) {
    j = nlohmann::json{{"platform_id", p.platform_id},
                       {"name", p.name},
                       {"arch_class", to_string(p.arch_class)},
                       {"cores", p.cores},
                       {"chips", p.chips},
                       {"cores_per_chip", p.cores_per_chip}};
    if (p.peak_theoretical) j["peak_theoretical"] = *p.peak_theoretical;
    if (p.roofline)
        j["roofline"] = {{"peak_flops", p.roofline->peak_flops},
                         {"peak_bandwidth", p.roofline->peak_bandwidth}};
}

inline void from_json(const nlohmann::json& j, Platform& p) {
    p.platform_id = j.at("platform_id").get<std::string>();
    p.name = j.at("name").get<std::string>();
    p.arch_class = arch_class_from_string(j.at("arch_class").get<std::string>());
    p.cores = j.at("cores").get<int>();
    p.chips = j.at("chips").get<int>();
    p.cores_per_chip = j.at("cores_per_chip").get<int>();
    if (j.contains("peak_theoretical") && !j["peak_theoretical"].is_null())
        p.peak_theoretical = j["peak_theoretical"].get<double>();
    if (j.contains("roofline") && !j["roofline"].is_null())
        p.roofline = RooflineSpec{j["roofline"].at("peak_flops").get<double>(),
                                  j["roofline"].at("peak_bandwidth").get<double>()};
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    j = nlohmann::json{{"record_id", r.record_id},
                       {"application_id", r.application_id},
                       {"suite_id", r.suite_id},
                       {"platform_id", r.platform_id},
                       {"model", r.model},
                       {"portable", r.portable},
                       {"level", to_string(r.level)},
                       {"workload", r.workload},
                       {"threads", r.threads},
                       {"run_seconds", r.run_seconds},
                       {"median_seconds", r.median_seconds},
                       {"disclosure", r.disclosure},
                       {"ingest_seq", r.ingest_seq}};
    if (r.achieved_throughput) j["achieved_throughput"] = *r.achieved_throughput;
    if (r.arithmetic_intensity) j["arithmetic_intensity"] = *r.arithmetic_intensity;
    if (r.supersedes) j["supersedes"] = *r.supersedes;
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
    r.application_id = j.at("application_id").get<std::string>();
    r.suite_id = j.at("suite_id").get<std::string>();
    r.platform_id = j.at("platform_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.portable = j.at("portable").get<bool>();
    r.level = level_from_string(j.at("level").get<std::string>());
    r.workload = j.at("workload").get<std::string>();
    r.threads = j.at("threads").get<int>();
    r.run_seconds = j.at("run_seconds").get<std::vector<double>>();
    if (j.contains("achieved_throughput") && !j["achieved_throughput"].is_null())
        r.achieved_throughput = j["achieved_throughput"].get<double>();
    if (j.contains("arithmetic_intensity") && !j["arithmetic_intensity"].is_null())
        r.arithmetic_intensity = j["arithmetic_intensity"].get<double>();
    if (j.contains("disclosure") && !j["disclosure"].is_null())
        r.disclosure = j["disclosure"].get<std::map<std::string, std::string>>();
    // record_id / median_seconds / ingest_seq are store-assigned; accepted on
    // input only when replaying a persisted log.
    if (j.contains("record_id")) r.record_id = j["record_id"].get<std::string>();
    if (j.contains("ingest_seq")) r.ingest_seq = j["ingest_seq"].get<std::uint64_t>();
    if (j.contains("supersedes") && !j["supersedes"].is_null())
        r.supersedes = j["supersedes"].get<std::string>();
}

// --- Store ------------------------------------------------------------------

namespace detail {

struct RepoState {
    std::vector<RunRecord> records;
    std::map<std::string, Platform> platforms;
    std::vector<std::string> platform_order;  // insertion order, for "all" listings
    BaselineIndex index;
    std::uint64_t next_seq = 1;
};

inline bool same_measurement(const RunRecord& a, const RunRecord& b) {
    return a.application_id == b.application_id && a.platform_id == b.platform_id &&
           a.model == b.model && a.level == b.level && a.workload == b.workload &&
           a.disclosure == b.disclosure;
}

}  // namespace detail

// Immutable point-in-time view. Cheap to copy; unaffected by later ingests.
class Snapshot {
public:
    explicit Snapshot(std::shared_ptr<const detail::RepoState> state)
        : state_(std::move(state)) {}

    const std::vector<RunRecord>& records() const { return state_->records; }
    const std::map<std::string, Platform>& platforms() const { return state_->platforms; }
    const std::vector<std::string>& platform_order() const { return state_->platform_order; }
    const BaselineIndex& baseline_index() const { return state_->index; }

    const Platform& platform(const std::string& id) const {
        auto it = state_->platforms.find(id);
        if (it == state_->platforms.end())
            throw ConfigError("unknown platform '" + id + "'");
        return it->second;
    }

    const RunRecord* find_record(const std::string& record_id) const {
        for (const auto& r : state_->records)
            if (r.record_id == record_id) return &r;
        return nullptr;
    }

    std::vector<RunRecord> query(const RecordFilter& filter) const {
        std::vector<RunRecord> out;
        for (const auto& r : state_->records)
            if (filter.matches(r)) out.push_back(r);
        return out;
    }

    std::optional<BaselineEntry> find_baseline(const std::string& application,
                                               const std::string& platform,
                                               const std::string& workload,
                                               ReferenceSpace space) const {
        auto it = state_->index.find(BaselineKey{application, platform, workload, space});
        if (it == state_->index.end()) return std::nullopt;
        return it->second;
    }

    // Index route of the best-known lookup; throws when the key is absent.
    BaselineEntry best_known(const std::string& application, const std::string& platform,
                             const std::string& workload, ReferenceSpace space) const {
        auto found = find_baseline(application, platform, workload, space);
        if (!found)
            throw BaselineNotFound(
                "no baseline for " +
                BaselineKey{application, platform, workload, space}.describe());
        return *found;
    }

    bool operator==(const Snapshot& other) const { return state_ == other.state_; }

private:
    std::shared_ptr<const detail::RepoState> state_;
};

class Repository {
public:
    // In-memory store.
    Repository() : state_(std::make_shared<detail::RepoState>()) {}

    // File-backed store rooted at a directory holding records.jsonl and
    // platforms.jsonl. Created on first write when absent.
    explicit Repository(std::filesystem::path dir)
        : dir_(std::move(dir)), state_(std::make_shared<detail::RepoState>()) {
        load();
    }

    Repository(Repository&& other) noexcept {
        std::lock_guard lock(other.mutex_);
        dir_ = std::move(other.dir_);
        state_ = std::move(other.state_);
    }
    Repository(const Repository&) = delete;
    Repository& operator=(const Repository&) = delete;
    Repository& operator=(Repository&&) = delete;

    static std::filesystem::path records_file(const std::filesystem::path& dir) {
        return dir / "records.jsonl";
    }
    static std::filesystem::path platforms_file(const std::filesystem::path& dir) {
        return dir / "platforms.jsonl";
    }

    // Idempotent for an identical redefinition; conflicting redefinition is
    // a configuration error.
    void add_platform(const Platform& p) {
        validate_platform(p);
        std::lock_guard lock(mutex_);
        auto it = state_->platforms.find(p.platform_id);
        if (it != state_->platforms.end()) {
            if (it->second == p) return;
            throw ConfigError("platform '" + p.platform_id +
                              "' already registered with different fields");
        }
        auto next = std::make_shared<detail::RepoState>(*state_);
        next->platforms[p.platform_id] = p;
        next->platform_order.push_back(p.platform_id);
        if (dir_) append_line(platforms_file(*dir_), nlohmann::json(p).dump());
        state_ = std::move(next);
    }

    // Validates, assigns record_id / median / ingest_seq, persists, and
    // updates the baseline index. Returns the index entries that changed.
    IngestResult ingest(const RunRecord& input, bool supersede = false) {
        std::lock_guard lock(mutex_);
        auto report = validate_record(input, state_->platforms);
        if (!report.ok()) throw ValidationError(std::move(report));

        const RunRecord* duplicate = nullptr;
        for (const auto& existing : state_->records)
            if (detail::same_measurement(existing, input)) duplicate = &existing;
        if (duplicate && !supersede)
            throw DuplicateRecord("duplicate of record " + duplicate->record_id +
                                      " (pass supersede to add anyway)",
                                  duplicate->record_id);

        RunRecord record = input;
        record.ingest_seq = state_->next_seq;
        record.record_id = "r" + std::to_string(record.ingest_seq);
        record.median_seconds = median_of_runs(record.run_seconds);
        if (duplicate) record.supersedes = duplicate->record_id;

        auto next = std::make_shared<detail::RepoState>(*state_);
        next->next_seq++;
        next->records.push_back(record);

        IngestResult result{record.record_id, record.ingest_seq, {}};
        for (ReferenceSpace space : kAllSpaces) {
            if (!eligible_for(record, space)) continue;
            BaselineKey key{record.application_id, record.platform_id, record.workload, space};
            auto it = next->index.find(key);
            if (it == next->index.end() || record.median_seconds < it->second.best_seconds) {
                std::optional<double> old;
                if (it != next->index.end()) old = it->second.best_seconds;
                next->index[key] =
                    BaselineEntry{record.record_id, record.median_seconds, record.ingest_seq};
                result.baseline_changes.push_back(
                    BaselineChange{key, old, record.median_seconds, record.record_id});
            }
        }

        if (dir_) append_line(records_file(*dir_), nlohmann::json(record).dump());
        state_ = std::move(next);
        return result;
    }

    std::vector<RunRecord> query(const RecordFilter& filter) const {
        return snapshot().query(filter);
    }

    BaselineEntry best_known(const std::string& application, const std::string& platform,
                             const std::string& workload, ReferenceSpace space) const {
        return snapshot().best_known(application, platform, workload, space);
    }

    Snapshot snapshot() const {
        std::lock_guard lock(mutex_);
        return Snapshot(state_);
    }

    static void validate_platform(const Platform& p) {
        if (p.platform_id.empty()) throw ConfigError("platform_id must not be empty");
        if (p.cores < 1 || p.chips < 1 || p.cores_per_chip < 1)
            throw ConfigError("platform '" + p.platform_id + "': counts must be positive");
        if (p.cores != p.chips * p.cores_per_chip)
            throw ConfigError("platform '" + p.platform_id +
                              "': cores must equal chips * cores_per_chip");
        if (p.peak_theoretical && !(*p.peak_theoretical > 0.0))
            throw ConfigError("platform '" + p.platform_id + "': peak must be positive");
        if (p.roofline && (!(p.roofline->peak_flops > 0.0) || !(p.roofline->peak_bandwidth > 0.0)))
            throw ConfigError("platform '" + p.platform_id + "': roofline peaks must be positive");
    }

private:
    void load() {
        if (!std::filesystem::exists(*dir_)) return;
        auto next = std::make_shared<detail::RepoState>();
        std::string line;

        if (std::ifstream pf(platforms_file(*dir_)); pf) {
            std::size_t line_no = 0;
            while (std::getline(pf, line)) {
                ++line_no;
                if (line.empty()) continue;
                Platform p;
                try {
                    p = nlohmann::json::parse(line).get<Platform>();
                } catch (const std::exception& e) {
                    throw ConfigError("platforms.jsonl line " + std::to_string(line_no) + ": " +
                                      e.what());
                }
                validate_platform(p);
                if (!next->platforms.count(p.platform_id))
                    next->platform_order.push_back(p.platform_id);
                next->platforms[p.platform_id] = p;
            }
        }

        if (std::ifstream rf(records_file(*dir_)); rf) {
            std::size_t line_no = 0;
            while (std::getline(rf, line)) {
                ++line_no;
                if (line.empty()) continue;
                RunRecord r;
                try {
                    r = nlohmann::json::parse(line).get<RunRecord>();
                } catch (const std::exception& e) {
                    throw ConfigError("records.jsonl line " + std::to_string(line_no) + ": " +
                                      e.what());
                }
                r.median_seconds = median_of_runs(r.run_seconds);
                next->records.push_back(std::move(r));
                next->next_seq = std::max(next->next_seq, next->records.back().ingest_seq + 1);
            }
        }

        next->index = rebuild_baseline_index(next->records);
        state_ = std::move(next);
    }

    void append_line(const std::filesystem::path& file, const std::string& line) {
        std::filesystem::create_directories(*dir_);
        std::ofstream out(file, std::ios::app);
        if (!out) throw ConfigError("cannot open " + file.string() + " for append");
        out << line << '\n';
        if (!out) throw ConfigError("write to " + file.string() + " failed");
    }

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::shared_ptr<const detail::RepoState> state_;
};

}  // namespace perfport
