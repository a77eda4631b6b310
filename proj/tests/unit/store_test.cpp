#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <sstream>

#include "nsense/ingest.hpp"
#include "nsense/store.hpp"
#include "test_support.hpp"

using namespace nsense;
using namespace nsense::store;
using nsense::testing::TempDir;

namespace {

MinuteRecord rec(std::int64_t minute, const char* i, const char* j, double s = 120.0) {
    MinuteRecord r;
    r.minute = minute;
    r.i = NodeId(i);
    r.j = NodeId(j);
    r.n_i = 1;
    r.d_ij = Distance::meters(2.0);
    r.s_ij = s;
    r.p_ij = s / 3.0;
    r.si_ij = 0.25;
    return r;
}

std::vector<MinuteRecord> minute_batch(std::int64_t minute) {
    return {rec(minute, "A", "B"), rec(minute, "B", "A")};
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("append then query reads back the same records") {
    TempDir dir("store-rw");
    auto log = RecordLog::create(dir / "x.log");
    CHECK(log.query(NodeId("A"), NodeId("B"), 0, 100).empty());
    log.append(minute_batch(5));
    const auto got = log.query(NodeId("A"), NodeId("B"), 5, 5);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == rec(5, "A", "B"));
    CHECK(RecordLog::read(dir / "x.log") == std::vector<MinuteRecord>(log.records().begin(), log.records().end()));
}

TEST_CASE("out-of-order appends are rejected as a whole batch") {
    TempDir dir("store-order");
    auto log = RecordLog::create(dir / "x.log");
    log.append(minute_batch(5));
    const auto size = std::filesystem::file_size(dir / "x.log");
    CHECK_THROWS_AS(log.append(minute_batch(3)), StoreError);
    CHECK_THROWS_AS(log.append(std::vector<MinuteRecord>{rec(6, "A", "B"), rec(6, "A", "B")}), StoreError);
    CHECK(std::filesystem::file_size(dir / "x.log") == size);
    CHECK(log.records().size() == 2);
    // Same minute with new pairs only is accepted.
    CHECK_NOTHROW(log.append(std::vector<MinuteRecord>{rec(5, "B", "C")}));
}

TEST_CASE("empty append is a no-op") {
    TempDir dir("store-empty");
    auto log = RecordLog::create(dir / "x.log");
    const auto size = std::filesystem::file_size(dir / "x.log");
    log.append({});
    CHECK(std::filesystem::file_size(dir / "x.log") == size);
    CHECK(size == kLogMagic.size());
}

TEST_CASE("queries select the directed pair within the range") {
    TempDir dir("store-query");
    auto log = RecordLog::create(dir / "x.log");
    for (std::int64_t m = 0; m < 10; ++m) log.append(minute_batch(m));
    CHECK(log.query(NodeId("A"), NodeId("B"), 0, 9).size() == 10);
    CHECK(log.query(NodeId("B"), NodeId("A"), 3, 4).size() == 2);
    CHECK(log.query(NodeId("A"), NodeId("B"), 20, 30).empty());
    CHECK(log.query(NodeId("A"), NodeId("B"), 5, 4).empty());
    CHECK(log.query(NodeId("A"), NodeId("C"), 0, 9).empty());
    const auto r = log.query(NodeId("A"), NodeId("B"), 2, 6);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(r[k].minute == static_cast<std::int64_t>(k) + 2);
}

TEST_CASE("a log truncated anywhere reopens as a prefix") {
    TempDir dir("store-crash");
    const auto path = dir / "x.log";
    std::vector<std::uintmax_t> boundaries{kLogMagic.size()};
    {
        auto log = RecordLog::create(path);
        for (std::int64_t m = 0; m < 6; ++m) {
            log.append(std::vector<MinuteRecord>{rec(m, "A", "B", 100.0 + m)});
            boundaries.push_back(std::filesystem::file_size(path));
        }
    }
    const auto full = nsense::testing::read_file(path);
    const auto all = RecordLog::read(path);
    for (std::size_t cut = kLogMagic.size(); cut <= full.size(); ++cut) {
        const auto p = dir / ("cut" + std::to_string(cut) + ".log");
        nsense::testing::write_file(p, full.substr(0, cut));
        const auto prefix = RecordLog::read(p);
        std::size_t complete = 0;
        while (complete + 1 < boundaries.size() && boundaries[complete + 1] <= cut) ++complete;
        REQUIRE(prefix.size() == complete);
        REQUIRE(std::equal(prefix.begin(), prefix.end(), all.begin()));

        auto reopened = RecordLog::open(p);
        REQUIRE(std::filesystem::file_size(p) == boundaries[complete]);
        reopened.append(std::vector<MinuteRecord>{rec(100, "A", "B")});
        REQUIRE(RecordLog::read(p).size() == complete + 1);
        std::filesystem::remove(p);
    }
}

TEST_CASE("corrupt logs are reported") {
    TempDir dir("store-corrupt");
    nsense::testing::write_file(dir / "bad.log", "XXXXX");
    CHECK_THROWS_AS(RecordLog::read(dir / "bad.log"), StoreError);
    CHECK_THROWS_AS(RecordLog::read(dir / "missing.log"), StoreError);
    std::string zero_len(kLogMagic);
    zero_len.append(4, '\0');
    nsense::testing::write_file(dir / "zero.log", zero_len);
    CHECK_THROWS_AS(RecordLog::read(dir / "zero.log"), StoreError);
}

TEST_CASE("export writes the record CSV and round trips through ingest") {
    TempDir dir("store-export");
    auto log = RecordLog::create(dir / "x.log");

    std::ostringstream empty;
    export_csv(log.records(), {}, empty);
    CHECK(empty.str() == std::string(ingest::kRecordHeader) + "\n");

    log.append(std::vector<MinuteRecord>{rec(1, "A", "B")});
    std::ostringstream one;
    export_csv(log.records(), {}, one);
    const auto text = one.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);

    for (std::int64_t m = 2; m < 8; ++m) log.append(minute_batch(m));
    ExportFilter f;
    f.pair = NodePair{NodeId("B"), NodeId("A")};
    f.from_minute = 3;
    f.to_minute = 5;
    export_csv(log.records(), f, dir / "out.csv");
    const auto back = ingest::read_records(dir / "out.csv");
    CHECK(back == log.query(NodeId("B"), NodeId("A"), 3, 5));
    CHECK(back.size() == 3);
}

TEST_CASE("exporting a 50 h, four-node log takes under a second") {
    std::vector<MinuteRecord> records;
    const char* ids[] = {"USense2", "USense3", "USense4", "USense5"};
    for (std::int64_t m = 0; m < 3000; ++m)
        for (auto i : ids)
            for (auto j : ids)
                if (std::string_view(i) != j) records.push_back(rec(m, i, j, 10.0 + static_cast<double>(m)));
    REQUIRE(records.size() == 36000);
    TempDir dir("store-perf");
    const auto t0 = std::chrono::steady_clock::now();
    export_csv(records, {}, dir / "big.csv");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("export of 36000 records: " << seconds << " s");
    CHECK(seconds < 1.0);
}

TEST_CASE("audit accepts record files and flags raw traces") {
    TempDir dir("store-audit");
    {
        auto log = RecordLog::create(dir / "x.log");
        log.append(minute_batch(0));
        export_csv(log.records(), {}, dir / "x.csv");
    }
    nsense::testing::write_file(dir / "raw.csv", std::string(ingest::kAccelHeader) + "\n0,A,0,0,9.81\n");
    nsense::testing::write_file(dir / "junk.csv", std::string(ingest::kRecordHeader) + "\n0,A,B,oops\n");
    auto tail = nsense::testing::read_file(dir / "x.log");
    nsense::testing::write_file(dir / "tail.log", tail + "\x05");

    const std::vector<std::filesystem::path> clean{dir / "x.log", dir / "x.csv"};
    CHECK(audit_persisted(clean).empty());

    const std::vector<std::filesystem::path> raw{dir / "raw.csv"};
    const auto raw_findings = audit_persisted(raw);
    REQUIRE_FALSE(raw_findings.empty());
    CHECK(raw_findings[0].message.find("raw sensor trace") != std::string::npos);

    const std::vector<std::filesystem::path> junk{dir / "junk.csv"};
    REQUIRE(audit_persisted(junk).size() == 1);
    CHECK(audit_persisted(junk)[0].line == 2);

    const std::vector<std::filesystem::path> partial{dir / "tail.log"};
    CHECK(audit_persisted(partial).size() == 1);
}

}
