#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "perfport/repository.hpp"

using namespace perfport;
using Catch::Approx;

namespace {

Platform make_platform(const std::string& id, ArchClass cls = ArchClass::cpu) {
    Platform p;
    p.platform_id = id;
    p.name = "platform " + id;
    p.arch_class = cls;
    p.cores = 16;
    p.chips = 2;
    p.cores_per_chip = 8;
    return p;
}

RunRecord make_record(const std::string& app, const std::string& platform,
                      const std::string& model, OptLevel level, std::vector<double> runs,
                      bool portable = true, const std::string& workload = "ref") {
    RunRecord r;
    r.application_id = app;
    r.suite_id = "SUITE";
    r.platform_id = platform;
    r.model = model;
    r.portable = portable;
    r.level = level;
    r.workload = workload;
    r.threads = 8;
    r.run_seconds = std::move(runs);
    r.disclosure = {{"compiler", "cc 1.0"}, {"flags", "-O2"}};
    return r;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path = std::filesystem::temp_directory_path() /
               ("perfport-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("median_of_runs") {
    CHECK(median_of_runs({10, 12, 11}) == 11);
    CHECK(median_of_runs({10}) == 10);
    CHECK(median_of_runs({10, 1000, 11}) == 11);  // robust to one outlier
    CHECK(median_of_runs({10, 20}) == 15);        // two runs: mean
    CHECK_THROWS_AS(median_of_runs({}), ValidationError);
    CHECK_THROWS_AS(median_of_runs({1, 2, 3, 4}), ValidationError);
    CHECK_THROWS_AS(median_of_runs({-1, 5, 5}), ValidationError);
}

TEST_CASE("validate_record") {
    std::map<std::string, Platform> platforms{{"p1", make_platform("p1")}};

    SECTION("well-formed record passes") {
        auto r = make_record("app", "p1", "OpenMP", OptLevel::base, {10, 11, 12});
        CHECK(validate_record(r, platforms).ok());
    }
    SECTION("unknown platform") {
        auto r = make_record("app", "p9", "OpenMP", OptLevel::base, {10});
        auto report = validate_record(r, platforms);
        REQUIRE_FALSE(report.ok());
        CHECK(report.joined().find("unknown platform") != std::string::npos);
    }
    SECTION("non-positive runtime") {
        auto r = make_record("app", "p1", "OpenMP", OptLevel::base, {-1, 5, 5});
        auto report = validate_record(r, platforms);
        CHECK(report.joined().find("non-positive runtime") != std::string::npos);
    }
    SECTION("non-portable peak-level record") {
        auto r = make_record("app", "p1", "CUDA", OptLevel::peak, {10}, false);
        auto report = validate_record(r, platforms);
        CHECK(report.joined().find("peak level") != std::string::npos);
    }
    SECTION("missing disclosure keys") {
        auto r = make_record("app", "p1", "OpenMP", OptLevel::base, {10});
        r.disclosure.erase("flags");
        auto report = validate_record(r, platforms);
        CHECK(report.joined().find("disclosure key 'flags'") != std::string::npos);
    }
    SECTION("all violations are collected, not just the first") {
        auto r = make_record("app", "unknown", "OpenMP", OptLevel::base, {-2});
        r.disclosure.clear();
        auto report = validate_record(r, platforms);
        CHECK(report.violations.size() >= 4);
    }
}

TEST_CASE("ingest and baselines") {
    Repository repo;
    repo.add_platform(make_platform("p1"));

    SECTION("first record becomes the baseline in its spaces") {
        auto result = repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {100}));
        CHECK(result.record_id == "r1");
        CHECK(result.baseline_changes.size() == 2);  // portable_any + any_impl, not peak
        auto snap = repo.snapshot();
        CHECK(snap.best_known("app", "p1", "ref", ReferenceSpace::portable_any).best_seconds ==
              100);
        CHECK(snap.best_known("app", "p1", "ref", ReferenceSpace::any_impl).best_seconds == 100);
        CHECK_THROWS_AS(snap.best_known("app", "p1", "ref", ReferenceSpace::same_impl_peak),
                        BaselineNotFound);
    }

    SECTION("faster non-portable record moves any_impl only") {
        repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {100}));
        auto result =
            repo.ingest(make_record("app", "p1", "native", OptLevel::base, {70}, false));
        REQUIRE(result.baseline_changes.size() == 1);
        CHECK(result.baseline_changes[0].key.space == ReferenceSpace::any_impl);
        CHECK(result.baseline_changes[0].old_best_seconds == 100);
        CHECK(result.baseline_changes[0].new_best_seconds == 70);
        auto snap = repo.snapshot();
        CHECK(snap.best_known("app", "p1", "ref", ReferenceSpace::portable_any).best_seconds ==
              100);
        CHECK(snap.best_known("app", "p1", "ref", ReferenceSpace::any_impl).best_seconds == 70);
    }

    SECTION("slower record changes nothing") {
        repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {100}));
        auto result = repo.ingest(make_record("app", "p1", "Kokkos", OptLevel::base, {150}));
        CHECK(result.baseline_changes.empty());
    }

    SECTION("duplicate is rejected without supersede, linked with it") {
        auto r = make_record("app", "p1", "OpenMP", OptLevel::base, {100});
        repo.ingest(r);
        CHECK_THROWS_AS(repo.ingest(r), DuplicateRecord);
        auto result = repo.ingest(r, /*supersede=*/true);
        const RunRecord* stored = repo.snapshot().find_record(result.record_id);
        REQUIRE(stored != nullptr);
        REQUIRE(stored->supersedes.has_value());
        CHECK(*stored->supersedes == "r1");
        CHECK(repo.snapshot().records().size() == 2);  // append-only
    }

    SECTION("validation failure rejects the record with the violation list") {
        auto r = make_record("app", "nope", "OpenMP", OptLevel::base, {100});
        CHECK_THROWS_AS(repo.ingest(r), ValidationError);
        CHECK(repo.snapshot().records().empty());
    }

    SECTION("equal medians keep the earlier record") {
        repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {90}));
        repo.ingest(make_record("app", "p1", "Kokkos", OptLevel::base, {90}));
        auto entry = repo.best_known("app", "p1", "ref", ReferenceSpace::portable_any);
        CHECK(entry.best_record == "r1");
    }
}

TEST_CASE("query") {
    Repository repo;
    repo.add_platform(make_platform("p1"));
    repo.add_platform(make_platform("p2"));
    repo.ingest(make_record("a", "p1", "OpenMP", OptLevel::base, {10}));
    repo.ingest(make_record("a", "p1", "OpenMP", OptLevel::peak, {9}));
    repo.ingest(make_record("b", "p2", "Kokkos", OptLevel::base, {20}));

    RecordFilter by_app;
    by_app.application_id = "a";
    auto rows = repo.query(by_app);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ingest_seq < rows[1].ingest_seq);  // ingest order

    RecordFilter by_level;
    by_level.level = OptLevel::peak;
    CHECK(repo.query(by_level).size() == 1);

    RecordFilter nothing;
    nothing.platform_id = "p3";
    CHECK(repo.query(nothing).empty());

    CHECK(Repository().query(RecordFilter{}).empty());
}

TEST_CASE("snapshot isolation") {
    Repository repo;
    repo.add_platform(make_platform("p1"));
    repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {100}));

    auto before = repo.snapshot();
    auto again = repo.snapshot();
    CHECK(before == again);  // no intervening ingest

    repo.ingest(make_record("app", "p1", "Kokkos", OptLevel::base, {80}));
    auto after = repo.snapshot();
    CHECK(before.records().size() == 1);
    CHECK(after.records().size() == 2);
    CHECK(before.best_known("app", "p1", "ref", ReferenceSpace::portable_any).best_seconds ==
          100);
    CHECK(after.best_known("app", "p1", "ref", ReferenceSpace::portable_any).best_seconds == 80);
}

TEST_CASE("platform registry") {
    Repository repo;
    auto p = make_platform("p1");
    repo.add_platform(p);
    repo.add_platform(p);  // identical re-add is idempotent
    CHECK(repo.snapshot().platforms().size() == 1);

    auto conflicting = p;
    conflicting.cores_per_chip = 4;
    conflicting.cores = 8;
    CHECK_THROWS_AS(repo.add_platform(conflicting), ConfigError);

    auto bad = make_platform("p2");
    bad.cores = 15;  // != chips * cores_per_chip
    CHECK_THROWS_AS(repo.add_platform(bad), ConfigError);
}

TEST_CASE("file-backed store round-trips") {
    TempDir dir;
    std::string id1, id2;
    {
        Repository repo(dir.path);
        repo.add_platform(make_platform("p1"));
        id1 = repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::base, {100, 90, 95}))
                  .record_id;
        id2 = repo.ingest(make_record("app", "p1", "OpenMP", OptLevel::peak, {80})).record_id;
    }
    Repository reopened(dir.path);
    auto snap = reopened.snapshot();
    REQUIRE(snap.records().size() == 2);
    CHECK(snap.records()[0].record_id == id1);
    CHECK(snap.records()[0].median_seconds == 95);
    CHECK(snap.records()[1].record_id == id2);
    CHECK(snap.platforms().count("p1") == 1);
    CHECK(snap.best_known("app", "p1", "ref", ReferenceSpace::same_impl_peak).best_seconds == 80);

    // appended records continue the sequence
    auto result = reopened.ingest(make_record("app", "p1", "Kokkos", OptLevel::base, {85}));
    CHECK(result.ingest_seq == 3);
}

TEST_CASE("fixture record log") {
    TempDir dir;
    Repository repo(dir.path);
    {
        std::ifstream in(std::string(PERFPORT_FIXTURES) + "/omp2012_platforms.jsonl");
        REQUIRE(in.good());
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) repo.add_platform(nlohmann::json::parse(line).get<Platform>());
    }
    {
        std::ifstream in(std::string(PERFPORT_FIXTURES) + "/omp2012_runs.jsonl");
        REQUIRE(in.good());
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) repo.ingest(nlohmann::json::parse(line).get<RunRecord>());
    }

    RecordFilter suite;
    suite.suite_id = "OMP2012";
    CHECK(repo.query(suite).size() == 60);  // 3 apps x 10 platforms x 2 levels

    RecordFilter peak6;
    peak6.level = OptLevel::peak;
    peak6.platform_id = "6";
    CHECK(repo.query(peak6).size() == 3);
}

TEST_CASE("repository properties") {
    std::mt19937 rng(987654);
    std::uniform_int_distribution<int> napps(1, 3), nplats(1, 3), nrecs(2, 24);
    std::uniform_real_distribution<double> secs(1.0, 1000.0);
    std::bernoulli_distribution coin(0.5);

    auto random_record = [&](int tag) {
        std::string app = "app" + std::to_string(napps(rng));
        std::string plat = "p" + std::to_string(nplats(rng));
        bool portable = coin(rng);
        OptLevel level = portable && coin(rng) ? OptLevel::peak : OptLevel::base;
        auto r = make_record(app, plat, "model" + std::to_string(tag), level, {secs(rng)},
                             portable);
        return r;
    };

    SECTION("incremental index equals brute-force rebuild") {
        for (int iter = 0; iter < 300; ++iter) {
            Repository repo;
            for (int p = 1; p <= 3; ++p) repo.add_platform(make_platform("p" + std::to_string(p)));
            int n = nrecs(rng);
            for (int i = 0; i < n; ++i) repo.ingest(random_record(i));
            auto snap = repo.snapshot();
            auto rebuilt = rebuild_baseline_index(snap.records());
            REQUIRE(rebuilt.size() == snap.baseline_index().size());
            for (const auto& [key, entry] : snap.baseline_index()) {
                auto it = rebuilt.find(key);
                REQUIRE(it != rebuilt.end());
                CHECK(it->second.best_record == entry.best_record);
                CHECK(it->second.best_seconds == entry.best_seconds);
            }
        }
    }

    SECTION("final baselines are independent of ingest order") {
        for (int iter = 0; iter < 200; ++iter) {
            int n = nrecs(rng);
            std::vector<RunRecord> batch;
            for (int i = 0; i < n; ++i) batch.push_back(random_record(i));

            auto run = [&](const std::vector<RunRecord>& records) {
                Repository repo;
                for (int p = 1; p <= 3; ++p)
                    repo.add_platform(make_platform("p" + std::to_string(p)));
                for (const auto& r : records) repo.ingest(r);
                return repo.snapshot();
            };
            auto shuffled = batch;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            auto a = run(batch), b = run(shuffled);
            REQUIRE(a.baseline_index().size() == b.baseline_index().size());
            for (const auto& [key, entry] : a.baseline_index()) {
                auto it = b.baseline_index().find(key);
                REQUIRE(it != b.baseline_index().end());
                // record ids differ by order; the best runtime may not
                CHECK(it->second.best_seconds == entry.best_seconds);
            }
        }
    }

    SECTION("baseline best_seconds never increases over the ingest sequence") {
        for (int iter = 0; iter < 100; ++iter) {
            Repository repo;
            for (int p = 1; p <= 3; ++p) repo.add_platform(make_platform("p" + std::to_string(p)));
            std::map<BaselineKey, double> last;
            int n = nrecs(rng);
            for (int i = 0; i < n; ++i) {
                repo.ingest(random_record(i));
                for (const auto& [key, entry] : repo.snapshot().baseline_index()) {
                    auto it = last.find(key);
                    if (it != last.end()) CHECK(entry.best_seconds <= it->second);
                    last[key] = entry.best_seconds;
                }
            }
        }
    }

    SECTION("median moves at most to the neighbouring run under one upward outlier") {
        std::uniform_real_distribution<double> bump(0.0, 1e6);
        std::uniform_int_distribution<int> which(0, 2);
        for (int iter = 0; iter < 500; ++iter) {
            std::vector<double> runs = {secs(rng), secs(rng), secs(rng)};
            std::vector<double> sorted = runs;
            std::sort(sorted.begin(), sorted.end());
            double med = median_of_runs(runs);
            CHECK(med == sorted[1]);
            auto perturbed = runs;
            perturbed[which(rng)] += bump(rng);
            double med2 = median_of_runs(perturbed);
            CHECK(med2 >= sorted[1]);
            CHECK(med2 <= sorted[2]);
        }
    }
}
