#pragma once

// Portability report assembly and rendering. Reports are pure values derived
// from a repository snapshot; rendering is a pure function of the report, so
// identical reports render byte-identically.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "perfport/efficiency.hpp"
#include "perfport/errors.hpp"
#include "perfport/metrics.hpp"
#include "perfport/repository.hpp"

namespace perfport {

enum class ReportFormat { text, markdown, csv };

inline ReportFormat format_from_string(const std::string& s) {
    if (s == "text") return ReportFormat::text;
    if (s == "markdown") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    throw UsageError("unknown format '" + s + "' (expected text|markdown|csv)");
}

// Shortest representation that parses back to the same double.
inline std::string format_number(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

// Round-half-even at the given number of decimals (display rule for percent
// columns; the FP environment default rounding is to-nearest-even).
inline double round_half_even(double x, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::nearbyint(x * scale) / scale;
}

inline std::string format_fixed(double x, int decimals) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, x);
    return std::string(buf.data());
}

inline std::string format_percent(double percent, int decimals) {
    return format_fixed(round_half_even(percent, decimals), decimals);
}

struct ReportRow {
    std::string platform_id;
    bool supported = false;
    std::optional<int> threads_base;
    std::optional<double> seconds_base;
    std::optional<int> threads_peak;   // application types 1/2: baseline record
    std::optional<double> seconds_peak;
    std::optional<double> efficiency;  // fraction in (0,1]
    bool clamped = false;
    std::optional<std::string> baseline_record;
};

// Metric roll-up over one architecture class ("all" covers the whole set).
struct ClassSummary {
    std::string label;
    std::size_t platform_count_total = 0;
    std::size_t platform_count_supported = 0;
    double pp_arithmetic = 0.0;         // percent
    double pp_harmonic_supported = 0.0; // percent
    double pp_harmonic_strict = 0.0;    // percent
    std::optional<DispersionPair> dispersion;  // percentage points
};

struct PortabilityReport {
    std::string application_id;
    EfficiencyType etype;
    std::string workload;
    std::vector<std::string> platform_set;  // H, in listing order
    std::vector<ReportRow> rows;            // one per platform in H
    double pp_arithmetic = 0.0;             // percent, all classes
    double pp_harmonic_supported = 0.0;
    double pp_harmonic_strict = 0.0;
    std::optional<DispersionPair> dispersion;
    std::vector<ClassSummary> class_breakdown;  // per class present, then "all"

    std::size_t supported_count() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.supported;
        return n;
    }
};

struct SuiteRow {
    std::string platform_id;
    bool supported = false;
    std::optional<double> efficiency;  // fraction
};

struct SuiteReport {
    std::string suite_id;
    std::vector<SuiteRow> rows;
    double pp_arithmetic = 0.0;  // percent

    std::size_t supported_count() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.supported;
        return n;
    }
};

struct ReportOptions {
    std::string workload;
    std::optional<std::string> model;  // restrict the scored implementation
};

namespace detail {

// Minimum-median record matching the predicate; ties to earliest ingest.
template <typename Pred>
const RunRecord* best_matching(const Snapshot& snapshot, Pred&& pred) {
    const RunRecord* best = nullptr;
    for (const auto& r : snapshot.records()) {
        if (!pred(r)) continue;
        if (!best || r.median_seconds < best->median_seconds ||
            (r.median_seconds == best->median_seconds && r.ingest_seq < best->ingest_seq))
            best = &r;
    }
    return best;
}

inline std::vector<EfficiencySample> rows_to_samples(const std::vector<ReportRow>& rows) {
    std::vector<EfficiencySample> samples;
    samples.reserve(rows.size());
    for (const auto& r : rows)
        samples.push_back(r.supported ? EfficiencySample::of(r.platform_id, *r.efficiency)
                                      : EfficiencySample::unsupported_on(r.platform_id));
    return samples;
}

inline ClassSummary summarize(const std::string& label,
                              const std::vector<EfficiencySample>& samples) {
    ClassSummary s;
    s.label = label;
    auto am = arithmetic_pp(samples);
    s.platform_count_total = am.platform_count_total;
    s.platform_count_supported = am.platform_count_supported;
    s.pp_arithmetic = am.value * 100.0;
    s.pp_harmonic_supported = harmonic_pp(samples, HarmonicMode::supported).value * 100.0;
    s.pp_harmonic_strict = harmonic_pp(samples, HarmonicMode::strict).value * 100.0;
    if (am.platform_count_supported > 0) s.dispersion = dispersion(samples);
    return s;
}

}  // namespace detail

// Per-platform efficiency rows for one application over the platform set H,
// with the three portability metrics and dispersion over the supported
// subset, grouped by architecture class plus an "all" roll-up.
inline PortabilityReport application_report(const Snapshot& snapshot,
                                            const std::string& application,
                                            const std::vector<std::string>& platform_set,
                                            EfficiencyType etype, const ReportOptions& opts) {
    PortabilityReport report;
    report.application_id = application;
    report.etype = etype;
    report.workload = opts.workload;
    report.platform_set = platform_set;

    auto base_filter = [&](const RunRecord& r, const std::string& platform) {
        if (r.application_id != application || r.platform_id != platform ||
            r.workload != opts.workload)
            return false;
        if (opts.model && r.model != *opts.model) return false;
        return true;
    };

    for (const auto& platform_id : platform_set) {
        const Platform& platform = snapshot.platform(platform_id);  // validates H
        ReportRow row;
        row.platform_id = platform_id;

        if (etype.approach == Approach::application && etype.type_no == 0) {
            // base vs peak of the portable implementation; external
            // non-portable baselines never pair into this ratio
            const RunRecord* base = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return base_filter(r, platform_id) && r.portable && r.level == OptLevel::base;
            });
            const RunRecord* peak = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return base_filter(r, platform_id) && r.portable && r.level == OptLevel::peak;
            });
            if (base && peak) {
                auto score = spec_efficiency(base->median_seconds, *peak);
                row.supported = true;
                row.threads_base = base->threads;
                row.seconds_base = base->median_seconds;
                row.threads_peak = peak->threads;
                row.seconds_peak = peak->median_seconds;
                row.efficiency = score.value;
                row.clamped = score.clamped;
                row.baseline_record = score.baseline_record;
            }
        } else if (etype.approach == Approach::application) {
            const RunRecord* achieved = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return base_filter(r, platform_id) && r.portable;
            });
            if (achieved) {
                ReferenceSpace space = etype.type_no == 1 ? ReferenceSpace::portable_any
                                                          : ReferenceSpace::any_impl;
                const RunRecord& baseline = resolve_baseline(snapshot, application, platform_id,
                                                             opts.workload, space);
                auto score = app_efficiency(achieved->median_seconds, baseline, etype.type_no);
                row.supported = true;
                row.threads_base = achieved->threads;
                row.seconds_base = achieved->median_seconds;
                row.threads_peak = baseline.threads;
                row.seconds_peak = baseline.median_seconds;
                row.efficiency = score.value;
                row.clamped = score.clamped;
                row.baseline_record = score.baseline_record;
            }
        } else {
            const bool needs_ai = etype.type_no == 1;
            const RunRecord* achieved = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return base_filter(r, platform_id) && r.portable &&
                       r.achieved_throughput.has_value() &&
                       (!needs_ai || r.arithmetic_intensity.has_value());
            });
            if (achieved) {
                auto score = arch_efficiency(*achieved->achieved_throughput, platform,
                                             etype.type_no, achieved->arithmetic_intensity);
                row.supported = true;
                row.threads_base = achieved->threads;
                row.seconds_base = achieved->median_seconds;
                row.efficiency = score.value;
                row.clamped = score.clamped;
            }
        }
        report.rows.push_back(std::move(row));
    }

    // Metrics per architecture class, then the all-classes roll-up.
    std::vector<std::string> class_order;
    std::map<std::string, std::vector<EfficiencySample>> by_class;
    auto samples = detail::rows_to_samples(report.rows);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const std::string cls = to_string(snapshot.platform(report.rows[i].platform_id).arch_class);
        if (!by_class.count(cls)) class_order.push_back(cls);
        by_class[cls].push_back(samples[i]);
    }
    for (const auto& cls : class_order)
        report.class_breakdown.push_back(detail::summarize(cls, by_class[cls]));
    auto all = detail::summarize("all", samples);
    report.pp_arithmetic = all.pp_arithmetic;
    report.pp_harmonic_supported = all.pp_harmonic_supported;
    report.pp_harmonic_strict = all.pp_harmonic_strict;
    report.dispersion = all.dispersion;
    report.class_breakdown.push_back(std::move(all));
    return report;
}

// Suite efficiency per platform as the geometric mean of the member
// applications' base-vs-peak efficiencies; suite score is the arithmetic
// mean over supported platforms.
inline SuiteReport suite_report(const Snapshot& snapshot, const std::string& suite,
                                const std::vector<std::string>& platform_set,
                                const std::string& workload) {
    std::set<std::string> members;
    for (const auto& r : snapshot.records())
        if (r.suite_id == suite) members.insert(r.application_id);
    if (members.empty()) throw UsageError("unknown suite '" + suite + "'");

    SuiteReport report;
    report.suite_id = suite;
    std::vector<EfficiencySample> samples;
    for (const auto& platform_id : platform_set) {
        snapshot.platform(platform_id);
        double log_sum = 0.0;
        std::size_t n = 0;
        for (const auto& app : members) {
            const RunRecord* base = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return r.application_id == app && r.platform_id == platform_id &&
                       r.workload == workload && r.portable && r.level == OptLevel::base;
            });
            const RunRecord* peak = detail::best_matching(snapshot, [&](const RunRecord& r) {
                return r.application_id == app && r.platform_id == platform_id &&
                       r.workload == workload && r.portable && r.level == OptLevel::peak;
            });
            if (!base || !peak) continue;
            log_sum += std::log(spec_efficiency(base->median_seconds, peak->median_seconds).value);
            ++n;
        }
        SuiteRow row;
        row.platform_id = platform_id;
        if (n > 0) {
            row.supported = true;
            row.efficiency = std::exp(log_sum / static_cast<double>(n));
            samples.push_back(EfficiencySample::of(platform_id, *row.efficiency));
        } else {
            samples.push_back(EfficiencySample::unsupported_on(platform_id));
        }
        report.rows.push_back(std::move(row));
    }
    report.pp_arithmetic = arithmetic_pp(samples).value * 100.0;
    return report;
}

// Fixture-column variant: per-platform suite efficiencies supplied directly,
// in percent. Platforms absent from the column are marked unsupported.
inline SuiteReport suite_report_from_column(const std::string& suite,
                                            const std::vector<std::string>& platform_set,
                                            const std::map<std::string, double>& percent_column) {
    SuiteReport report;
    report.suite_id = suite;
    std::vector<EfficiencySample> samples;
    for (const auto& platform_id : platform_set) {
        SuiteRow row;
        row.platform_id = platform_id;
        auto it = percent_column.find(platform_id);
        if (it != percent_column.end()) {
            row.supported = true;
            row.efficiency = it->second / 100.0;
            samples.push_back(EfficiencySample::of(platform_id, *row.efficiency));
        } else {
            samples.push_back(EfficiencySample::unsupported_on(platform_id));
        }
        report.rows.push_back(std::move(row));
    }
    report.pp_arithmetic = arithmetic_pp(samples).value * 100.0;
    return report;
}

// --- Rendering ----------------------------------------------------------

struct RenderOptions {
    int precision = 1;  // decimals for the summary metrics (cells stay integer)
    bool show_pp = true;
    bool show_harmonic_supported = true;
    bool show_harmonic_strict = true;
    bool show_dispersion = true;
};

namespace detail {

inline const std::array<const char*, 6> kReportColumns = {
    "Platform", "Base threads", "Base seconds", "Peak threads", "Peak seconds", "Efficiency"};

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string opt_int(const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string("--");
}

inline std::string opt_num(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("--");
}

// Table cells for one row; the efficiency cell is an integer percent, with a
// '*' suffix when the raw ratio was clamped (markers suppressed in CSV).
inline std::array<std::string, 6> row_cells(const ReportRow& r, bool markers) {
    std::array<std::string, 6> cells;
    cells[0] = r.platform_id;
    cells[1] = opt_int(r.threads_base);
    cells[2] = opt_num(r.seconds_base);
    cells[3] = opt_int(r.threads_peak);
    cells[4] = opt_num(r.seconds_peak);
    cells[5] = r.supported ? format_percent(*r.efficiency * 100.0, 0) : std::string("--");
    if (markers && r.clamped) cells[5] += '*';
    return cells;
}

inline std::string summary_text(const ClassSummary& s, const RenderOptions& opt) {
    std::string out;
    auto add = [&out](const std::string& piece) {
        if (!out.empty()) out += "   ";
        out += piece;
    };
    if (opt.show_pp) add("P̄P = " + format_percent(s.pp_arithmetic, opt.precision) + "%");
    if (opt.show_harmonic_supported)
        add("ℰ(supported) = " + format_percent(s.pp_harmonic_supported, opt.precision) + "%");
    if (opt.show_harmonic_strict)
        add("ℰ(strict) = " + format_percent(s.pp_harmonic_strict, opt.precision) + "%");
    if (opt.show_dispersion && s.dispersion) {
        add("S.D.(AM) = " + format_percent(s.dispersion->sd_am, opt.precision));
        add("S.D.(HM) = " + format_percent(s.dispersion->sd_hm, opt.precision));
    }
    add("|S| = " + std::to_string(s.platform_count_supported) + "/" +
        std::to_string(s.platform_count_total));
    if (s.platform_count_supported == 0) add("[no supported platforms]");
    return out;
}

inline void summary_csv(std::string& out, const ClassSummary& s, const std::string& prefix,
                        const RenderOptions& opt) {
    auto line = [&out, &prefix](const std::string& key, const std::string& value) {
        out += prefix.empty() ? key : prefix + "_" + key;
        out += ',';
        out += value;
        out += '\n';
    };
    if (opt.show_pp) line("pp_arithmetic", format_percent(s.pp_arithmetic, opt.precision));
    if (opt.show_harmonic_supported)
        line("pp_harmonic_supported", format_percent(s.pp_harmonic_supported, opt.precision));
    if (opt.show_harmonic_strict)
        line("pp_harmonic_strict", format_percent(s.pp_harmonic_strict, opt.precision));
    if (opt.show_dispersion && s.dispersion) {
        line("sd_am", format_percent(s.dispersion->sd_am, opt.precision));
        line("sd_hm", format_percent(s.dispersion->sd_hm, opt.precision));
    }
    line("supported", std::to_string(s.platform_count_supported) + "/" +
                          std::to_string(s.platform_count_total));
}

inline std::string render_grid_text(const std::vector<std::array<std::string, 6>>& grid) {
    std::array<std::size_t, 6> width{};
    for (std::size_t c = 0; c < 6; ++c) width[c] = std::string(kReportColumns[c]).size();
    for (const auto& row : grid)
        for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());

    std::string out;
    auto emit = [&](const std::array<std::string, 6>& cells) {
        for (std::size_t c = 0; c < 6; ++c) {
            std::string cell = cells[c];
            if (c == 0)
                cell += std::string(width[c] - cell.size(), ' ');  // left-align ids
            else
                cell = std::string(width[c] - cell.size(), ' ') + cell;
            out += cell;
            out += c + 1 < 6 ? "  " : "";
        }
        out += '\n';
    };
    std::array<std::string, 6> header;
    for (std::size_t c = 0; c < 6; ++c) header[c] = kReportColumns[c];
    emit(header);
    for (const auto& row : grid) emit(row);
    return out;
}

inline std::string render_grid_markdown(const std::vector<std::array<std::string, 6>>& grid) {
    std::string out = "|";
    for (const char* col : kReportColumns) out += std::string(" ") + col + " |";
    out += "\n|";
    for (std::size_t c = 0; c < 6; ++c) out += " --- |";
    out += '\n';
    for (const auto& row : grid) {
        out += "|";
        for (const auto& cell : row) out += " " + cell + " |";
        out += '\n';
    }
    return out;
}

}  // namespace detail

inline std::string render(const PortabilityReport& report, ReportFormat format,
                          const RenderOptions& opt = {}) {
    std::vector<std::array<std::string, 6>> grid;
    grid.reserve(report.rows.size());
    const bool markers = format != ReportFormat::csv;
    bool any_clamped = false;
    for (const auto& row : report.rows) {
        grid.push_back(detail::row_cells(row, markers));
        any_clamped = any_clamped || (row.supported && row.clamped);
    }

    const ClassSummary& all = report.class_breakdown.back();
    const bool multi_class = report.class_breakdown.size() > 2;

    std::string out;
    switch (format) {
        case ReportFormat::text:
        case ReportFormat::markdown: {
            std::string title = report.application_id + "  [" + report.etype.name() +
                                ", workload " + report.workload + "]";
            if (format == ReportFormat::text) {
                out += title + "\n\n";
                out += detail::render_grid_text(grid);
            } else {
                out += "### " + title + "\n\n";
                out += detail::render_grid_markdown(grid);
            }
            out += '\n';
            out += detail::summary_text(all, opt) + '\n';
            if (multi_class)
                for (std::size_t i = 0; i + 1 < report.class_breakdown.size(); ++i)
                    out += "[" + report.class_breakdown[i].label + "]  " +
                           detail::summary_text(report.class_breakdown[i], opt) + '\n';
            if (markers && any_clamped)
                out += "* raw ratio above 1 clamped to 100%\n";
            break;
        }
        case ReportFormat::csv: {
            for (std::size_t c = 0; c < 6; ++c)
                out += std::string(detail::kReportColumns[c]) + (c + 1 < 6 ? "," : "");
            out += '\n';
            for (const auto& row : grid) {
                for (std::size_t c = 0; c < 6; ++c)
                    out += detail::csv_field(row[c]) + (c + 1 < 6 ? "," : "");
                out += '\n';
            }
            detail::summary_csv(out, all, "", opt);
            if (multi_class)
                for (std::size_t i = 0; i + 1 < report.class_breakdown.size(); ++i)
                    detail::summary_csv(out, report.class_breakdown[i],
                                        report.class_breakdown[i].label, opt);
            break;
        }
    }
    return out;
}

inline std::string render(const SuiteReport& report, ReportFormat format,
                          const RenderOptions& opt = {}) {
    std::string out;
    auto eff_cell = [](const SuiteRow& r) {
        return r.supported ? format_percent(*r.efficiency * 100.0, 0) : std::string("--");
    };
    const std::string pp = format_percent(report.pp_arithmetic, opt.precision);
    const std::string support = std::to_string(report.supported_count()) + "/" +
                                std::to_string(report.rows.size());
    switch (format) {
        case ReportFormat::text: {
            out += report.suite_id + "  [suite]\n\n";
            std::size_t width = std::string("Platform").size();
            for (const auto& r : report.rows) width = std::max(width, r.platform_id.size());
            out += "Platform" + std::string(width - 8, ' ') + "  Efficiency\n";
            for (const auto& r : report.rows) {
                std::string cell = eff_cell(r);
                out += r.platform_id + std::string(width - r.platform_id.size(), ' ');
                out += "  " + std::string(10 - std::min<std::size_t>(10, cell.size()), ' ') + cell;
                out += '\n';
            }
            out += "\nP̄P = " + pp + "%   |S| = " + support;
            if (report.supported_count() == 0) out += "   [no supported platforms]";
            out += '\n';
            break;
        }
        case ReportFormat::markdown: {
            out += "### " + report.suite_id + "  [suite]\n\n";
            out += "| Platform | Efficiency |\n| --- | --- |\n";
            for (const auto& r : report.rows)
                out += "| " + r.platform_id + " | " + eff_cell(r) + " |\n";
            out += "\nP̄P = " + pp + "%   |S| = " + support;
            if (report.supported_count() == 0) out += "   [no supported platforms]";
            out += '\n';
            break;
        }
        case ReportFormat::csv: {
            out += "Platform,Efficiency\n";
            for (const auto& r : report.rows)
                out += detail::csv_field(r.platform_id) + "," + eff_cell(r) + "\n";
            out += "pp_arithmetic," + pp + "\n";
            out += "supported," + support + "\n";
            break;
        }
    }
    return out;
}

// Parser for the CSV this module renders (quoted fields, "" escapes).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r': break;
            case '\n':
                if (any || !field.empty() || !row.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                field.clear();
                row.clear();
                any = false;
                break;
            default: field += c; any = true;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace perfport
