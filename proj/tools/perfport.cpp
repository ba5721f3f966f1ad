// Command-line front end: platform registry, record ingest, portability
// reports, baseline listings, and record queries over a file-backed
// repository.
//
// Exit codes: 0 success, 1 partial or data failure, 2 usage or
// configuration failure. Machine output goes to stdout, diagnostics to
// stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "perfport/perfport.hpp"

namespace {

using namespace perfport;

constexpr int kOk = 0;
constexpr int kDataFailure = 1;
constexpr int kUsageFailure = 2;

struct GlobalOpts {
    std::string repo_path;
    std::string format = "text";
    int precision = 1;
};

Repository open_repo(const GlobalOpts& g, bool for_write) {
    if (g.repo_path.empty())
        throw UsageError("no repository path: pass --repo or set PERFPORT_REPO");
    if (!for_write && !std::filesystem::exists(g.repo_path))
        throw ConfigError("repository '" + g.repo_path + "' does not exist");
    return Repository(g.repo_path);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::string> resolve_platform_set(const Snapshot& snapshot,
                                              const std::string& platforms_arg) {
    if (platforms_arg.empty() || platforms_arg == "all") {
        if (snapshot.platform_order().empty())
            throw ConfigError("repository has no registered platforms");
        return snapshot.platform_order();
    }
    return split_list(platforms_arg);
}

// Unique workload of the matching records, unless one was given explicitly.
std::string resolve_workload(const Snapshot& snapshot, const RecordFilter& filter,
                             const std::string& explicit_workload) {
    if (!explicit_workload.empty()) return explicit_workload;
    std::set<std::string> found;
    for (const auto& r : snapshot.records())
        if (filter.matches(r)) found.insert(r.workload);
    if (found.size() == 1) return *found.begin();
    if (found.empty()) return "";
    throw UsageError("records span " + std::to_string(found.size()) +
                     " workloads; pass --workload");
}

RenderOptions render_options(const GlobalOpts& g, const std::string& metrics_arg) {
    RenderOptions opt;
    opt.precision = g.precision;
    if (metrics_arg.empty()) return opt;
    opt.show_pp = opt.show_harmonic_supported = opt.show_harmonic_strict =
        opt.show_dispersion = false;
    for (const auto& token : split_list(metrics_arg)) {
        if (token == "pp") opt.show_pp = true;
        else if (token == "hm-supported") opt.show_harmonic_supported = true;
        else if (token == "hm-strict") opt.show_harmonic_strict = true;
        else if (token == "sd") opt.show_dispersion = true;
        else throw UsageError("unknown metric '" + token +
                              "' (expected pp|hm-supported|hm-strict|sd)");
    }
    return opt;
}

int cmd_platform_add(const GlobalOpts& g, const std::string& file, const Platform& flags_platform,
                     bool have_flags) {
    Repository repo = open_repo(g, true);
    std::vector<Platform> to_add;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read platform file '" + file + "'");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                to_add.push_back(nlohmann::json::parse(line).get<Platform>());
            } catch (const std::exception& e) {
                throw ConfigError(file + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    if (have_flags) to_add.push_back(flags_platform);
    if (to_add.empty()) throw UsageError("platform add needs --file or platform flags");
    for (const auto& p : to_add) {
        bool existed = repo.snapshot().platforms().count(p.platform_id) > 0;
        repo.add_platform(p);  // idempotent when identical, throws on conflict
        std::cout << (existed ? "exists " : "added ") << p.platform_id << "\n";
    }
    return kOk;
}

int cmd_ingest(const GlobalOpts& g, const std::string& file, bool supersede) {
    if (!std::filesystem::exists(file)) throw ConfigError("record file '" + file + "' not found");
    Repository repo = open_repo(g, true);
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read record file '" + file + "'");

    std::size_t accepted = 0, rejected = 0, line_no = 0;
    std::vector<BaselineChange> changes;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            RunRecord record = nlohmann::json::parse(line).get<RunRecord>();
            auto result = repo.ingest(record, supersede);
            changes.insert(changes.end(), result.baseline_changes.begin(),
                           result.baseline_changes.end());
            ++accepted;
        } catch (const std::exception& e) {
            std::cerr << file << " line " << line_no << ": " << e.what() << "\n";
            ++rejected;
        }
    }
    std::cout << "accepted " << accepted << " rejected " << rejected << "\n";
    for (const auto& c : changes) {
        std::cout << "baseline " << c.key.describe() << " -> " << c.new_best_record << " "
                  << format_number(c.new_best_seconds) << " s";
        if (c.old_best_seconds)
            std::cout << " (was " << format_number(*c.old_best_seconds) << " s)";
        std::cout << "\n";
    }
    return rejected == 0 ? kOk : kDataFailure;
}

std::map<std::string, double> load_suite_column(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read suite column file '" + file + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::map<std::string, double> column;
    for (const auto& row : parse_csv(buffer.str())) {
        if (row.size() < 2) continue;
        try {
            column[row[0]] = std::stod(row[1]);
        } catch (const std::exception&) {
            // header or stray row
        }
    }
    if (column.empty()) throw ConfigError("no platform,efficiency rows in '" + file + "'");
    return column;
}

int cmd_report(const GlobalOpts& g, const std::string& app, const std::string& suite,
               const std::string& platforms_arg, const std::string& type_arg,
               const std::string& workload_arg, const std::string& model_arg,
               const std::string& metrics_arg, const std::string& suite_column_file) {
    Repository repo = open_repo(g, false);
    Snapshot snapshot = repo.snapshot();
    auto platform_set = resolve_platform_set(snapshot, platforms_arg);
    auto opt = render_options(g, metrics_arg);
    ReportFormat format = format_from_string(g.format);

    if (!suite.empty()) {
        if (type_arg != "app-0" && !type_arg.empty() && suite_column_file.empty())
            throw UsageError("suite reports support only --type app-0");
        SuiteReport report;
        if (!suite_column_file.empty()) {
            report = suite_report_from_column(suite, platform_set,
                                              load_suite_column(suite_column_file));
        } else {
            RecordFilter filter;
            filter.suite_id = suite;
            std::string workload = resolve_workload(snapshot, filter, workload_arg);
            report = suite_report(snapshot, suite, platform_set, workload);
        }
        std::cout << render(report, format, opt);
        return kOk;
    }

    RecordFilter filter;
    filter.application_id = app;
    if (snapshot.query(filter).empty()) throw UsageError("unknown application '" + app + "'");
    ReportOptions ropt;
    ropt.workload = resolve_workload(snapshot, filter, workload_arg);
    if (!model_arg.empty()) ropt.model = model_arg;
    EfficiencyType etype = EfficiencyType::parse(type_arg.empty() ? "app-0" : type_arg);
    auto report = application_report(snapshot, app, platform_set, etype, ropt);
    std::cout << render(report, format, opt);
    return kOk;
}

int cmd_baselines(const GlobalOpts& g, const std::string& app, const std::string& platform,
                  const std::string& workload) {
    Repository repo = open_repo(g, false);
    Snapshot snapshot = repo.snapshot();
    for (ReferenceSpace space : kAllSpaces) {
        std::cout << to_string(space) << ": ";
        auto entry = snapshot.find_baseline(app, platform, workload, space);
        if (!entry) {
            std::cout << "none\n";
            continue;
        }
        std::cout << entry->best_record << " " << format_number(entry->best_seconds) << " s";
        if (const RunRecord* r = snapshot.find_record(entry->best_record))
            std::cout << " [model=" << r->model << " level=" << to_string(r->level)
                      << (r->portable ? " portable" : " non-portable") << "]";
        std::cout << "\n";
    }
    return kOk;
}

int cmd_query(const GlobalOpts& g, const RecordFilter& filter) {
    Repository repo = open_repo(g, false);
    for (const auto& r : repo.query(filter)) std::cout << nlohmann::json(r).dump() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"performance portability metrics engine and results repository"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--repo", global.repo_path, "repository directory")
        ->envname("PERFPORT_REPO");
    app.add_option("--format", global.format, "output format: text|markdown|csv")
        ->default_val("text");
    app.add_option("--precision", global.precision, "decimals for summary metrics")
        ->default_val(1);

    // platform add
    auto* platform_cmd = app.add_subcommand("platform", "platform registry");
    platform_cmd->fallthrough();
    auto* padd = platform_cmd->add_subcommand("add", "register platforms");
    padd->fallthrough();
    std::string pfile;
    Platform pdef;
    std::string pclass = "cpu";
    double peak_gflops = 0, roof_flops = 0, roof_bw = 0;
    padd->add_option("--file", pfile, "platform JSONL file");
    auto* pid_opt = padd->add_option("--id", pdef.platform_id, "platform identifier");
    padd->add_option("--name", pdef.name, "platform name");
    padd->add_option("--class", pclass, "architecture class: cpu|gpu|other");
    padd->add_option("--cores", pdef.cores, "total cores");
    padd->add_option("--chips", pdef.chips, "chips");
    padd->add_option("--cores-per-chip", pdef.cores_per_chip, "cores per chip");
    padd->add_option("--peak-gflops", peak_gflops, "theoretical peak, GFLOP/s");
    padd->add_option("--roofline-flops", roof_flops, "roofline peak, GFLOP/s");
    padd->add_option("--roofline-bw", roof_bw, "roofline bandwidth, GB/s");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "ingest a record-log file");
    ingest_cmd->fallthrough();
    std::string record_file;
    bool supersede = false;
    ingest_cmd->add_option("file", record_file, "record JSONL file")->required();
    ingest_cmd->add_flag("--supersede", supersede, "allow superseding identical records");

    // report
    auto* report_cmd = app.add_subcommand("report", "portability report");
    report_cmd->fallthrough();
    std::string rapp, rsuite, rplatforms = "all", rtype, rworkload, rmodel, rmetrics, rcolumn;
    report_cmd->add_option("--app", rapp, "application identifier");
    report_cmd->add_option("--suite", rsuite, "suite identifier");
    report_cmd->add_option("--platforms", rplatforms, "comma list of platform ids, or 'all'");
    report_cmd->add_option("--type", rtype, "efficiency type: app-0|app-1|app-2|arch-0|arch-1");
    report_cmd->add_option("--workload", rworkload, "workload size label");
    report_cmd->add_option("--model", rmodel, "restrict scored records to one programming model");
    report_cmd->add_option("--metrics", rmetrics, "comma list: pp|hm-supported|hm-strict|sd");
    report_cmd->add_option("--suite-column", rcolumn,
                           "CSV file of per-platform suite efficiencies (percent)");

    // baselines
    auto* baselines_cmd = app.add_subcommand("baselines", "best-known records per space");
    baselines_cmd->fallthrough();
    std::string bapp, bplatform, bworkload;
    baselines_cmd->add_option("--app", bapp, "application identifier")->required();
    baselines_cmd->add_option("--platform", bplatform, "platform identifier")->required();
    baselines_cmd->add_option("--workload", bworkload, "workload size label")->required();

    // query
    auto* query_cmd = app.add_subcommand("query", "list records as JSONL");
    query_cmd->fallthrough();
    std::string qapp, qsuite, qplatform, qmodel, qworkload, qlevel, qportable;
    query_cmd->add_option("--app", qapp, "application filter");
    query_cmd->add_option("--suite", qsuite, "suite filter");
    query_cmd->add_option("--platform", qplatform, "platform filter");
    query_cmd->add_option("--model", qmodel, "model filter");
    query_cmd->add_option("--workload", qworkload, "workload filter");
    query_cmd->add_option("--level", qlevel, "level filter: base|peak");
    query_cmd->add_option("--portable", qportable, "portability filter: true|false");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageFailure;
    }

    try {
        if (padd->parsed()) {
            bool have_flags = pid_opt->count() > 0;
            if (have_flags) {
                pdef.arch_class = arch_class_from_string(pclass);
                if (peak_gflops > 0) pdef.peak_theoretical = peak_gflops;
                if (roof_flops > 0 || roof_bw > 0)
                    pdef.roofline = RooflineSpec{roof_flops, roof_bw};
            }
            return cmd_platform_add(global, pfile, pdef, have_flags);
        }
        if (ingest_cmd->parsed()) return cmd_ingest(global, record_file, supersede);
        if (report_cmd->parsed()) {
            if (rapp.empty() == rsuite.empty())
                throw UsageError("report needs exactly one of --app or --suite");
            return cmd_report(global, rapp, rsuite, rplatforms, rtype, rworkload, rmodel,
                              rmetrics, rcolumn);
        }
        if (baselines_cmd->parsed()) return cmd_baselines(global, bapp, bplatform, bworkload);
        if (query_cmd->parsed()) {
            RecordFilter filter;
            if (!qapp.empty()) filter.application_id = qapp;
            if (!qsuite.empty()) filter.suite_id = qsuite;
            if (!qplatform.empty()) filter.platform_id = qplatform;
            if (!qmodel.empty()) filter.model = qmodel;
            if (!qworkload.empty()) filter.workload = qworkload;
            if (!qlevel.empty()) filter.level = level_from_string(qlevel);
            if (!qportable.empty()) {
                if (qportable != "true" && qportable != "false")
                    throw UsageError("--portable expects true or false");
                filter.portable = qportable == "true";
            }
            return cmd_query(global, filter);
        }
        throw UsageError("no subcommand given");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataFailure;
    } catch (const DuplicateRecord& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataFailure;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageFailure;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageFailure;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataFailure;
    }
}
