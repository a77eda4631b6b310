#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "nsense/ingest.hpp"
#include "nsense/simulator.hpp"
#include "test_support.hpp"

using namespace nsense;
using namespace nsense::ingest;
using nsense::testing::Gen;
using nsense::testing::TempDir;

namespace {

ParseError parse_error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        read_sightings(in, "sightings.csv");
    } catch (const ParseError& e) {
        return e;
    }
    return ParseError("<none>", 0, 0, "no error");
}

MinuteRecord sample_record() {
    MinuteRecord r;
    r.minute = 12;
    r.i = NodeId("USense2");
    r.j = NodeId("USense5");
    r.n_i = 3;
    r.m_i = Motion::Moving;
    r.v_i = SoundClass::Alert;
    r.d_ij = Distance::meters(1.2345678901234567);
    r.s_ij = 812.5;
    r.p_ij = 0.1 + 0.2;
    r.si_ij = 1.0 / 3.0;
    r.nearness = Nearness::Avg;
    return r;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("header-only files give an empty trace set") {
    std::istringstream s(std::string(kSightingHeader) + "\n"), a(std::string(kAccelHeader) + "\n"),
        v(std::string(kSoundHeader) + "\n");
    CHECK(read_sightings(s, "s").empty());
    CHECK(read_accel(a, "a").empty());
    CHECK(read_sound(v, "v").empty());
}

TEST_CASE("a sighting row maps onto one BtSighting") {
    std::istringstream in(std::string(kSightingHeader) + "\n60000,USense2,USense5,-67.0\n");
    const auto rows = read_sightings(in, "s");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].t.minute() == 1);
    CHECK(rows[0].observer == NodeId("USense2"));
    CHECK(rows[0].subject == NodeId("USense5"));
    CHECK(rows[0].rssi_dbm == -67.0);
}

TEST_CASE("parse errors name line and column") {
    const std::string h = std::string(kSightingHeader) + "\n";
    auto e = parse_error_of(h + "60000,USense2,USense5,abc\n");
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
    CHECK(std::string(e.what()).find("sightings.csv:2:4") == 0);

    e = parse_error_of(h + "0,A,B,-50\nxx,A,B,-50\n");
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);

    e = parse_error_of(h + "0,A,B\n");
    CHECK(e.line() == 2);
    CHECK(e.column() == 0);

    e = parse_error_of(h + "0,A,A,-50\n");
    CHECK(e.column() == 3);

    e = parse_error_of(h + "0,A,B,5\n");
    CHECK(e.column() == 4);

    e = parse_error_of(h + "100,A,B,-50\n50,A,C,-50\n");
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);

    e = parse_error_of("time,who,whom,rssi\n");
    CHECK(e.line() == 1);

    e = parse_error_of("");
    CHECK(e.line() == 1);
}

TEST_CASE("per-observer monotonicity allows interleaved observers") {
    std::istringstream in(std::string(kSightingHeader) + "\n100,A,B,-50\n50,B,A,-50\n150,A,B,-50\n");
    CHECK(read_sightings(in, "s").size() == 3);
}

TEST_CASE("epoch offset converts wall-clock timestamps") {
    std::istringstream in(std::string(kSoundHeader) + "\n1700000060000,A,0.5\n");
    const auto rows = read_sound(in, "v", ReadOptions{1700000000000});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].t.ms == 60000);

    std::istringstream early(std::string(kSoundHeader) + "\n5,A,0.5\n");
    CHECK_THROWS_AS(read_sound(early, "v", ReadOptions{10}), ParseError);
}

TEST_CASE("CRLF line endings and blank lines are tolerated") {
    std::istringstream in(std::string(kAccelHeader) + "\r\n0,A,0,0,9.81\r\n\r\n50,A,0,0,9.8\r\n");
    CHECK(read_accel(in, "a").size() == 2);
}

TEST_CASE("empty trace set writes three header-only files") {
    TempDir dir("ingest-empty");
    write_traces(TraceSet{}, dir.path());
    const auto paths = TracePaths::in_dir(dir.path());
    CHECK(nsense::testing::read_file(paths.sightings) == std::string(kSightingHeader) + "\n");
    CHECK(nsense::testing::read_file(paths.accel) == std::string(kAccelHeader) + "\n");
    CHECK(nsense::testing::read_file(paths.sound) == std::string(kSoundHeader) + "\n");
    CHECK(read_traces(paths).empty());
}

TEST_CASE("missing trace file is a parse error naming it") {
    TempDir dir("ingest-missing");
    try {
        read_traces(TracePaths::in_dir(dir.path()));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.file().find(".csv") != std::string::npos);
    }
}

TEST_CASE("reals format in shortest round-trip form") {
    Gen g(3);
    for (int k = 0; k < 20000; ++k) {
        const double x = g.coin() ? g.uniform(-1e6, 1e6) : std::ldexp(g.uniform(0.5, 1.0), static_cast<int>(g.integer(-1000, 1000)));
        const auto parsed = parse_real(format_real(x));
        REQUIRE(parsed.has_value());
        REQUIRE(*parsed == x);
    }
    CHECK(format_real(-67.0) == "-67");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(parse_real("inf") == std::numeric_limits<double>::infinity());
    CHECK_FALSE(parse_real("nan").has_value());
    CHECK_FALSE(parse_real("1.0x").has_value());
    CHECK_FALSE(parse_real("").has_value());
    CHECK(parse_int("-42") == -42);
    CHECK_FALSE(parse_int("4.2").has_value());
}

TEST_CASE("record rows round trip, OUT_OF_RANGE as inf") {
    auto r = sample_record();
    CHECK(parse_record_row(format_record_row(r), "r", 2) == r);

    r.d_ij = Distance::out_of_range();
    r.p_ij = 0.0;
    r.si_ij = 0.0;
    const auto row = format_record_row(r);
    CHECK(row.find(",inf,") != std::string::npos);
    CHECK(parse_record_row(row, "r", 2) == r);
}

TEST_CASE("record rows enforce invariants") {
    auto column_of = [](const std::string& row) -> std::size_t {
        try {
            parse_record_row(row, "r", 2);
        } catch (const ParseError& e) {
            return e.column();
        }
        return 999;
    };
    CHECK(column_of("0,A,B,1,1,1,inf,10,0.5,0,Low") == 9);
    CHECK(column_of("0,A,A,1,1,1,2,10,0.5,0,Low") == 3);
    CHECK(column_of("0,A,B,1,3,1,2,10,0.5,0,Low") == 5);
    CHECK(column_of("0,A,B,1,1,4,2,10,0.5,0,Low") == 6);
    CHECK(column_of("0,A,B,1,1,1,-2,10,0.5,0,Low") == 7);
    CHECK(column_of("0,A,B,1,1,1,2,10,0.5,0,Medium") == 11);
    CHECK(column_of("0,A,B,1,1,1,2,10,0.5,0") == 0);
    CHECK(column_of("-1,A,B,1,1,1,2,10,0.5,0,Low") == 1);
    CHECK(column_of("0,A,B,1,1,1,2,10,0.5,0,Low") == 999);
}

TEST_CASE("record files round trip") {
    std::vector<MinuteRecord> rows{sample_record()};
    rows.push_back(sample_record());
    rows[1].minute = 13;
    std::ostringstream out;
    write_records(out, rows);
    std::istringstream in(out.str());
    CHECK(read_records(in, "r") == rows);
}

TEST_CASE("generated trace sets round trip through the CSV files") {
    auto c = nsense::testing::fixed_pair(4.0, 20 * kMsPerMinute, 17);
    c.rf.shadowing_sigma_db = 2.0;
    c.agents[0].sound.push_back({0, 10 * kMsPerMinute, 0.0123});
    const auto ts = sim::generate(c).first;
    TempDir dir("ingest-rt");
    write_traces(ts, dir.path());
    CHECK(read_traces(TracePaths::in_dir(dir.path())) == ts);
}

TEST_CASE("a million-sample trace set round trips byte for byte") {
    sim::ScenarioConfig c;
    c.seed = 99;
    c.duration_ms = 210 * kMsPerMinute;
    c.rf.shadowing_sigma_db = 2.0;
    c.rf.scan_interval_ms = 10'000;
    for (int k = 0; k < 4; ++k)
        c.agents.push_back({NodeId("N" + std::to_string(k)), {{0, 2.0 * k, 0}, {kMsPerHour, 2.0 * k + 5, 1}}, {{0, kMsPerHour, 0.02}}});
    const auto ts = sim::generate(c).first;
    REQUIRE(ts.size() >= 1'000'000);

    TempDir first("ingest-1e6-a"), second("ingest-1e6-b");
    write_traces(ts, first.path());
    const auto back = read_traces(TracePaths::in_dir(first.path()));
    CHECK(back == ts);
    write_traces(back, second.path());
    for (auto name : {kSightingFile, kAccelFile, kSoundFile}) {
        const auto a = nsense::testing::read_file(first.path() / std::string(name));
        const auto b = nsense::testing::read_file(second.path() / std::string(name));
        CHECK(a == b);
    }
}

TEST_CASE("samples() flattens in sensor order") {
    TraceSet ts;
    ts.sound.push_back({Tick{0}, NodeId("A"), 0.1});
    ts.sightings.push_back({Tick{5}, NodeId("A"), NodeId("B"), -50});
    const auto all = ts.samples();
    REQUIRE(all.size() == 2);
    CHECK(std::holds_alternative<BtSighting>(all[0]));
    CHECK(std::holds_alternative<SoundSample>(all[1]));
}

}
