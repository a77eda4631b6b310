#include "nsense/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <sstream>
#include <system_error>

namespace nsense {

void TraceSet::append(TraceSet&& other) {
    sightings.insert(sightings.end(), std::make_move_iterator(other.sightings.begin()),
                     std::make_move_iterator(other.sightings.end()));
    accel.insert(accel.end(), std::make_move_iterator(other.accel.begin()),
                 std::make_move_iterator(other.accel.end()));
    sound.insert(sound.end(), std::make_move_iterator(other.sound.begin()),
                 std::make_move_iterator(other.sound.end()));
    other = TraceSet{};
}

std::vector<SensorSample> TraceSet::samples() const {
    std::vector<SensorSample> out;
    out.reserve(size());
    out.insert(out.end(), sightings.begin(), sightings.end());
    out.insert(out.end(), accel.begin(), accel.end());
    out.insert(out.end(), sound.begin(), sound.end());
    return out;
}

}  // namespace nsense

namespace nsense::ingest {

TracePaths TracePaths::in_dir(const std::filesystem::path& dir) {
    return {dir / kSightingFile, dir / kAccelFile, dir / kSoundFile};
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void append_real(std::string& out, double x) {
    if (std::isinf(x)) {
        out += x > 0 ? "inf" : "-inf";
        return;
    }
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("cannot format real");
    out.append(buf, end);
}

std::string format_real(double x) {
    std::string s;
    append_real(s, x);
    return s;
}

std::optional<double> parse_real(std::string_view text) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    if (std::isnan(value)) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

namespace {

/// Iterates the data rows of one CSV file after checking its header.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string name, std::string_view header, std::size_t columns)
        : in_(in), name_(std::move(name)), columns_(columns) {
        if (!std::getline(in_, line_)) throw ParseError(name_, 1, 0, "missing header");
        strip_cr();
        if (line_ != header)
            throw ParseError(name_, 1, 0, "malformed header, expected '" + std::string(header) + "'");
        line_no_ = 1;
    }

    bool next() {
        while (std::getline(in_, line_)) {
            ++line_no_;
            strip_cr();
            if (line_.empty()) continue;
            fields_ = split_fields(line_);
            if (fields_.size() != columns_)
                fail(0, "expected " + std::to_string(columns_) + " fields, found " + std::to_string(fields_.size()));
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(std::size_t column, const std::string& what) const {
        throw ParseError(name_, line_no_, column, what);
    }

    std::int64_t integer(std::size_t col) const {
        auto v = parse_int(fields_[col - 1]);
        if (!v) fail(col, "not an integer: '" + std::string(fields_[col - 1]) + "'");
        return *v;
    }

    double real(std::size_t col) const {
        auto v = parse_real(fields_[col - 1]);
        if (!v) fail(col, "not a number: '" + std::string(fields_[col - 1]) + "'");
        return *v;
    }

    NodeId node(std::size_t col) const {
        const auto text = fields_[col - 1];
        if (auto why = NodeId::check(text); !why.empty()) fail(col, why);
        return NodeId(std::string(text));
    }

    Tick tick(std::size_t col, const ReadOptions& options) const {
        auto ms = integer(col);
        if (options.epoch_ms) ms -= *options.epoch_ms;
        if (ms < 0) fail(col, "timestamp before epoch");
        return Tick{ms};
    }

    /// Enforces non-decreasing time within one stream key.
    void monotone(const std::string& key, Tick t) {
        auto [it, inserted] = last_.try_emplace(key, t.ms);
        if (!inserted) {
            if (t.ms < it->second) fail(1, "timestamp decreases within stream '" + key + "'");
            it->second = t.ms;
        }
    }

    std::string_view field(std::size_t col) const { return fields_[col - 1]; }

private:
    void strip_cr() {
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    }

    std::istream& in_;
    std::string name_;
    std::size_t columns_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::vector<std::string_view> fields_;
    std::map<std::string, std::int64_t> last_;
};

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p.string(), 0, 0, "cannot open file");
    return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

}  // namespace

std::vector<BtSighting> read_sightings(std::istream& in, const std::string& name, const ReadOptions& options) {
    CsvReader csv(in, name, kSightingHeader, 4);
    std::vector<BtSighting> out;
    while (csv.next()) {
        BtSighting s{csv.tick(1, options), csv.node(2), csv.node(3), csv.real(4)};
        if (s.observer == s.subject) csv.fail(3, "observer sighted itself");
        if (!(s.rssi_dbm >= kMinRssiDbm && s.rssi_dbm <= kMaxRssiDbm)) csv.fail(4, "rssi outside [-120, 0] dBm");
        csv.monotone(s.observer.str(), s.t);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<AccelSample> read_accel(std::istream& in, const std::string& name, const ReadOptions& options) {
    CsvReader csv(in, name, kAccelHeader, 5);
    std::vector<AccelSample> out;
    while (csv.next()) {
        AccelSample s{csv.tick(1, options), csv.node(2), csv.real(3), csv.real(4), csv.real(5)};
        for (std::size_t c = 3; c <= 5; ++c)
            if (std::isinf(csv.real(c))) csv.fail(c, "non-finite acceleration");
        csv.monotone(s.node.str(), s.t);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SoundSample> read_sound(std::istream& in, const std::string& name, const ReadOptions& options) {
    CsvReader csv(in, name, kSoundHeader, 3);
    std::vector<SoundSample> out;
    while (csv.next()) {
        SoundSample s{csv.tick(1, options), csv.node(2), csv.real(3)};
        if (!(s.amplitude >= 0.0 && s.amplitude <= 1.0)) csv.fail(3, "amplitude outside [0, 1]");
        csv.monotone(s.node.str(), s.t);
        out.push_back(std::move(s));
    }
    return out;
}

TraceSet read_traces(const TracePaths& paths, const ReadOptions& options) {
    auto load = [&options](const std::filesystem::path& p, auto reader) {
        auto in = open_in(p);
        return reader(in, p.string(), options);
    };
    // The three files are independent; parse them concurrently.
    auto sightings = std::async(std::launch::async, [&] {
        return load(paths.sightings, [](std::istream& in, const std::string& n, const ReadOptions& o) {
            return read_sightings(in, n, o);
        });
    });
    auto accel = std::async(std::launch::async, [&] {
        return load(paths.accel, [](std::istream& in, const std::string& n, const ReadOptions& o) {
            return read_accel(in, n, o);
        });
    });
    auto sound = std::async(std::launch::async, [&] {
        return load(paths.sound, [](std::istream& in, const std::string& n, const ReadOptions& o) {
            return read_sound(in, n, o);
        });
    });
    TraceSet ts;
    ts.sightings = sightings.get();
    ts.accel = accel.get();
    ts.sound = sound.get();
    return ts;
}

void write_sightings(std::ostream& out, std::span<const BtSighting> rows) {
    std::string buf;
    buf.append(kSightingHeader).push_back('\n');
    for (const auto& s : rows) {
        buf += std::to_string(s.t.ms);
        buf.push_back(',');
        buf += s.observer.str();
        buf.push_back(',');
        buf += s.subject.str();
        buf.push_back(',');
        append_real(buf, s.rssi_dbm);
        buf.push_back('\n');
        if (buf.size() > (1u << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_accel(std::ostream& out, std::span<const AccelSample> rows) {
    std::string buf;
    buf.append(kAccelHeader).push_back('\n');
    for (const auto& s : rows) {
        buf += std::to_string(s.t.ms);
        buf.push_back(',');
        buf += s.node.str();
        for (double v : {s.ax, s.ay, s.az}) {
            buf.push_back(',');
            append_real(buf, v);
        }
        buf.push_back('\n');
        if (buf.size() > (1u << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_sound(std::ostream& out, std::span<const SoundSample> rows) {
    std::string buf;
    buf.append(kSoundHeader).push_back('\n');
    for (const auto& s : rows) {
        buf += std::to_string(s.t.ms);
        buf.push_back(',');
        buf += s.node.str();
        buf.push_back(',');
        append_real(buf, s.amplitude);
        buf.push_back('\n');
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_traces(const TraceSet& ts, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto paths = TracePaths::in_dir(dir);
    {
        auto out = open_out(paths.sightings);
        write_sightings(out, ts.sightings);
    }
    {
        auto out = open_out(paths.accel);
        write_accel(out, ts.accel);
    }
    {
        auto out = open_out(paths.sound);
        write_sound(out, ts.sound);
    }
}

std::string format_record_row(const MinuteRecord& r) {
    std::string row;
    row += std::to_string(r.minute);
    row.push_back(',');
    row += r.i.str();
    row.push_back(',');
    row += r.j.str();
    row.push_back(',');
    row += std::to_string(r.n_i);
    row.push_back(',');
    row += std::to_string(static_cast<int>(r.m_i));
    row.push_back(',');
    row += std::to_string(static_cast<int>(r.v_i));
    row.push_back(',');
    append_real(row, r.d_ij.as_double());
    for (double v : {r.s_ij, r.p_ij, r.si_ij}) {
        row.push_back(',');
        append_real(row, v);
    }
    row.push_back(',');
    row += to_string(r.nearness);
    return row;
}

MinuteRecord parse_record_row(std::string_view row, const std::string& name, std::size_t line) {
    const auto f = split_fields(row);
    auto fail = [&](std::size_t col, const std::string& what) -> void { throw ParseError(name, line, col, what); };
    if (f.size() != 11) fail(0, "expected 11 fields, found " + std::to_string(f.size()));

    auto integer = [&](std::size_t col) {
        auto v = parse_int(f[col - 1]);
        if (!v) fail(col, "not an integer: '" + std::string(f[col - 1]) + "'");
        return *v;
    };
    auto real = [&](std::size_t col) {
        auto v = parse_real(f[col - 1]);
        if (!v) fail(col, "not a number: '" + std::string(f[col - 1]) + "'");
        return *v;
    };
    auto node = [&](std::size_t col) {
        if (auto why = NodeId::check(f[col - 1]); !why.empty()) fail(col, why);
        return NodeId(std::string(f[col - 1]));
    };

    MinuteRecord r;
    r.minute = integer(1);
    if (r.minute < 0) fail(1, "negative minute");
    r.i = node(2);
    r.j = node(3);
    if (r.i == r.j) fail(3, "record pairs a node with itself");
    const auto n = integer(4);
    if (n < 0) fail(4, "negative node degree");
    r.n_i = static_cast<int>(n);
    const auto m = integer(5);
    if (m != 1 && m != 2) fail(5, "motion must be 1 or 2");
    r.m_i = static_cast<Motion>(m);
    const auto v = integer(6);
    if (v < 0 || v > 3) fail(6, "sound class must be in 0..3");
    r.v_i = static_cast<SoundClass>(v);
    const double d = real(7);
    if (std::isinf(d) && d > 0)
        r.d_ij = Distance::out_of_range();
    else if (d >= 0 && std::isfinite(d))
        r.d_ij = Distance::meters(d);
    else
        fail(7, "distance must be >= 0 or inf");
    r.s_ij = real(8);
    r.p_ij = real(9);
    r.si_ij = real(10);
    for (std::size_t col = 8; col <= 10; ++col)
        if (!(real(col) >= 0.0) || std::isinf(real(col))) fail(col, "value must be finite and >= 0");
    if ((!r.d_ij.in_range() || r.s_ij == 0.0) && (r.p_ij != 0.0 || r.si_ij != 0.0))
        fail(9, "p and si must be 0 when distance is OUT_OF_RANGE or s is 0");
    try {
        r.nearness = nearness_from_string(f[10]);
    } catch (const ValidationError& e) {
        fail(11, e.what());
    }
    return r;
}

void write_records(std::ostream& out, std::span<const MinuteRecord> records) {
    std::string buf;
    buf.append(kRecordHeader).push_back('\n');
    for (const auto& r : records) {
        buf += format_record_row(r);
        buf.push_back('\n');
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<MinuteRecord> read_records(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, 0, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordHeader)
        throw ParseError(name, 1, 0, "malformed header, expected '" + std::string(kRecordHeader) + "'");
    std::vector<MinuteRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(parse_record_row(line, name, line_no));
    }
    return out;
}

std::vector<MinuteRecord> read_records(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_records(in, path.string());
}

}  // namespace nsense::ingest
