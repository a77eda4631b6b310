#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "nsense/ingest.hpp"
#include "nsense/store.hpp"
#include "test_support.hpp"

using namespace nsense;
using nsense::testing::read_file;
using nsense::testing::scenario_path;
using nsense::testing::TempDir;
using nsense::testing::write_file;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "nsense");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

/// Writes a short two-node scenario and returns its path.
std::filesystem::path small_scenario(const TempDir& dir) {
    const auto p = dir / "small.scn";
    write_file(p, R"(duration = 20m
seed = 1
[rf]
shadowing_sigma_db = 2
[agent P]
waypoint = 0 0 0
sound = 0 20m 0.01
[agent Q]
waypoint = 0 3 0
sound = 0 20m 0.01
[agent R]
waypoint = 0 900 0
)");
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == cli::kInputError);
    CHECK(invoke({"bogus"}).code == cli::kInputError);
    CHECK(invoke({"simulate", "--out", "x"}).code == cli::kInputError);
    CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("missing scenario file exits with 2 and a message") {
    TempDir dir("cli-missing");
    const auto r = invoke({"simulate", "--scenario", (dir / "nope.scn").string(), "--out", (dir / "t").string()});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("nope.scn") != std::string::npos);
}

TEST_CASE("invalid scenario reports the field path") {
    TempDir dir("cli-badcfg");
    write_file(dir / "bad.scn", "duration = 1h\n[agent A]\nwaypoint = 0 0 0\nwaypoint = 0 1 1\n");
    const auto r = invoke({"run", "--scenario", (dir / "bad.scn").string(), "--out", (dir / "x.log").string()});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("agents[A].waypoints[1].t_ms") != std::string::npos);
}

TEST_CASE("simulate with the same seed twice writes identical files") {
    TempDir dir("cli-seed");
    const auto scn = small_scenario(dir).string();
    REQUIRE(invoke({"simulate", "--scenario", scn, "--out", (dir / "a").string(), "--seed", "42"}).code == 0);
    REQUIRE(invoke({"simulate", "--scenario", scn, "--out", (dir / "b").string(), "--seed", "42"}).code == 0);
    REQUIRE(invoke({"simulate", "--scenario", scn, "--out", (dir / "c").string(), "--seed", "43"}).code == 0);
    for (auto f : {ingest::kSightingFile, ingest::kAccelFile, ingest::kSoundFile}) {
        const std::string name(f);
        CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
    }
    CHECK(read_file(dir / "a" / "accel.csv") != read_file(dir / "c" / "accel.csv"));
}

TEST_CASE("bundled experiment 1 simulates a 7 h span") {
    TempDir dir("cli-exp1");
    REQUIRE(invoke({"simulate", "--scenario", scenario_path("experiment1.scn").string(), "--out", dir.path().string()}).code == 0);
    const auto ts = ingest::read_traces(ingest::TracePaths::in_dir(dir.path()));
    REQUIRE_FALSE(ts.accel.empty());
    CHECK(ts.accel.front().t.ms == 0);
    CHECK(ts.accel.back().t.ms == 7 * kMsPerHour - sim::kAccelPeriodMs);
    CHECK(ts.sound.back().t.minute() == 7 * 60 - 1);
}

TEST_CASE("run from traces and from the scenario agree; runs are byte-identical") {
    TempDir dir("cli-run");
    const auto scn = small_scenario(dir).string();
    REQUIRE(invoke({"simulate", "--scenario", scn, "--out", (dir / "t").string()}).code == 0);
    REQUIRE(invoke({"run", "--traces", (dir / "t").string(), "--scenario", scn, "--out", (dir / "a.log").string()}).code == 0);
    REQUIRE(invoke({"run", "--traces", (dir / "t").string(), "--scenario", scn, "--out", (dir / "b.log").string()}).code == 0);
    const auto live = invoke({"run", "--scenario", scn, "--out", (dir / "c.log").string()});
    REQUIRE(live.code == 0);
    CHECK(live.out.find("pairs: 1") != std::string::npos);
    CHECK(read_file(dir / "a.log") == read_file(dir / "b.log"));
    CHECK(read_file(dir / "a.log") == read_file(dir / "c.log"));
    CHECK(std::filesystem::exists(dir / "c.log.report.json"));

    const auto report = nlohmann::json::parse(read_file(dir / "c.log.report.json"));
    CHECK(report["seed"] == 1);
    CHECK(report["minutes"] == 20);
    CHECK(report["pairs"].size() == 1);
    CHECK(report.contains("runtime_ms"));
}

TEST_CASE("empty traces give an empty log and a report with zero pairs") {
    TempDir dir("cli-empty");
    ingest::write_traces(TraceSet{}, dir / "t");
    const auto r = invoke({"run", "--traces", (dir / "t").string(), "--out", (dir / "e.log").string(),
                        "--report", (dir / "e.json").string()});
    REQUIRE(r.code == 0);
    CHECK(store::RecordLog::read(dir / "e.log").empty());
    const auto report = nlohmann::json::parse(read_file(dir / "e.json"));
    CHECK(report["pairs"].empty());
    CHECK(report["records"] == 0);
}

TEST_CASE("malformed traces abort with 2 before any processing") {
    TempDir dir("cli-badtrace");
    ingest::write_traces(TraceSet{}, dir / "t");
    write_file(dir / "t" / "sound.csv", std::string(ingest::kSoundHeader) + "\n0,A,loud\n");
    const auto r = invoke({"run", "--traces", (dir / "t").string(), "--out", (dir / "x.log").string()});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("sound.csv:2:3") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "x.log"));
    CHECK(invoke({"run", "--out", (dir / "y.log").string()}).code == cli::kInputError);
}

TEST_CASE("epoch shifts wall-clock traces") {
    TempDir dir("cli-epoch");
    ingest::write_traces(TraceSet{}, dir / "t");
    write_file(dir / "t" / "sightings.csv", std::string(ingest::kSightingHeader) + "\n1000060000,A,B,-50\n");
    const auto r = invoke({"run", "--traces", (dir / "t").string(), "--epoch", "1000000000", "--out",
                        (dir / "x.log").string()});
    REQUIRE(r.code == 0);
    const auto recs = store::RecordLog::read(dir / "x.log");
    REQUIRE(recs.size() == 2);
    CHECK(recs.front().minute == 1);
}

TEST_CASE("analyze prints the series and the symmetry summary") {
    TempDir dir("cli-analyze");
    const auto scn = small_scenario(dir).string();
    const auto log = (dir / "a.log").string();
    REQUIRE(invoke({"run", "--scenario", scn, "--out", log}).code == 0);

    const auto r = invoke({"analyze", log, "--pair", "P,Q", "--metric", "propinquity", "--from-min", "2", "--to-min", "4"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("minute,metric_value\n2,", 0) == 0);
    CHECK(r.out.find("\n4,") != std::string::npos);
    CHECK(r.out.find("\n5,") == std::string::npos);
    CHECK(r.out.find("# pair=P,Q metric=p") != std::string::npos);
    CHECK(r.out.find("# points=3") != std::string::npos);
    CHECK(r.out.find("# symmetry_correlation=") != std::string::npos);

    CHECK(invoke({"analyze", log, "--pair", "P,Zed"}).code == cli::kQueryError);
    CHECK(invoke({"analyze", log, "--pair", "P"}).code == cli::kInputError);
    CHECK(invoke({"analyze", log, "--pair", "P,Q", "--metric", "x"}).code == cli::kInputError);
    CHECK(invoke({"analyze", (dir / "none.log").string(), "--pair", "P,Q"}).code == cli::kInputError);
}

TEST_CASE("analyze of a pair that never met is an empty series") {
    TempDir dir("cli-nevermet");
    const char* ids[] = {"A", "B", "C"};
    auto log = store::RecordLog::create(dir / "x.log");
    std::vector<MinuteRecord> recs;
    for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 2}, std::pair{2, 1}}) {
        MinuteRecord r;
        r.i = NodeId(ids[i]);
        r.j = NodeId(ids[j]);
        recs.push_back(r);
    }
    log.append(recs);
    const auto r = invoke({"analyze", (dir / "x.log").string(), "--pair", "A,C"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("minute,metric_value\n#", 0) == 0);
    CHECK(r.out.find("# points=0") != std::string::npos);
}

TEST_CASE("export filters and writes the record CSV") {
    TempDir dir("cli-export");
    const auto scn = small_scenario(dir).string();
    const auto log = (dir / "a.log").string();
    REQUIRE(invoke({"run", "--scenario", scn, "--out", log}).code == 0);
    REQUIRE(invoke({"export", log, "--out", (dir / "all.csv").string()}).code == 0);
    REQUIRE(invoke({"export", log, "--out", (dir / "pq.csv").string(), "--pair", "Q,P", "--from-min", "10"}).code == 0);
    CHECK(ingest::read_records(dir / "all.csv").size() == 40);
    const auto pq = ingest::read_records(dir / "pq.csv");
    CHECK(pq.size() == 10);
    for (const auto& r : pq) CHECK(r.i == NodeId("Q"));
    CHECK(invoke({"export", log, "--out", (dir / "z.csv").string(), "--pair", "Q,Q"}).code == cli::kInputError);

    const std::vector<std::filesystem::path> persisted{log, dir / "all.csv", dir / "pq.csv"};
    CHECK(store::audit_persisted(persisted).empty());
}

TEST_CASE("report content is stable apart from the runtime") {
    engine::RunReport rep;
    rep.minutes = 3;
    rep.runtime_ms = 12.5;
    const auto a = cli::report_to_json(rep, {{"k", 1}}, 7, false);
    rep.runtime_ms = 99.0;
    const auto b = cli::report_to_json(rep, {{"k", 1}}, 7, false);
    CHECK(a.dump() == b.dump());
    CHECK_FALSE(a.contains("runtime_ms"));
    CHECK(cli::report_to_json(rep, {}, std::nullopt)["seed"].is_null());
}

}
