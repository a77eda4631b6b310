// Scenario file reader/writer.
//
//   # comment
//   duration = 7h              top level: duration, seed, accel_noise_sigma
//   [rf]                       p_ref_dbm, pathloss_exp, shadowing_sigma_db,
//                              scan_interval, max_range_m
//   [agent USense2]            repeated section, one per agent
//   waypoint = 0 0 0           t x y        (repeated)
//   sound = 0 3h 0.01          from to amp  (repeated)
//
// Times accept plain milliseconds or unit literals such as 90s, 15m, 3h15m.

#include <cctype>
#include <fstream>
#include <sstream>

#include "nsense/ingest.hpp"
#include "nsense/simulator.hpp"

namespace nsense::sim {

std::optional<std::int64_t> parse_duration_ms(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (auto plain = ingest::parse_int(text)) return plain;
    std::int64_t total = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t digits = pos;
        while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) ++digits;
        if (digits == pos) return std::nullopt;
        const auto number = ingest::parse_int(text.substr(pos, digits - pos));
        if (!number) return std::nullopt;
        std::size_t unit_end = digits;
        while (unit_end < text.size() && std::isalpha(static_cast<unsigned char>(text[unit_end]))) ++unit_end;
        const auto unit = text.substr(digits, unit_end - digits);
        std::int64_t scale = 0;
        if (unit == "ms") scale = 1;
        else if (unit == "s") scale = kMsPerSecond;
        else if (unit == "m") scale = kMsPerMinute;
        else if (unit == "h") scale = kMsPerHour;
        else return std::nullopt;
        total += *number * scale;
        pos = unit_end;
    }
    return total;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        std::size_t end = pos;
        while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
        if (end > pos) out.push_back(s.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string name) : name_(std::move(name)) {}

    ScenarioConfig run(std::istream& in) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_;
            auto line = std::string_view(raw);
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                section(line);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail(section_path(), "expected 'key = value'");
            assign(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return std::move(config_);
    }

private:
    enum class Section { Top, Rf, Agent };

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ConfigError(field, name_ + ":" + std::to_string(line_) + ": " + what);
    }

    std::string section_path() const {
        switch (section_) {
            case Section::Top: return "scenario";
            case Section::Rf: return "rf";
            case Section::Agent: return "agents[" + config_.agents.back().id.str() + "]";
        }
        return "scenario";
    }

    void section(std::string_view line) {
        if (line.back() != ']') fail("scenario", "unterminated section header");
        const auto parts = words(line.substr(1, line.size() - 2));
        if (parts.size() == 1 && parts[0] == "rf") {
            section_ = Section::Rf;
            return;
        }
        if (parts.size() == 2 && parts[0] == "agent") {
            if (auto why = NodeId::check(parts[1]); !why.empty()) fail("agents", why);
            config_.agents.push_back(AgentConfig{NodeId(std::string(parts[1])), {}, {}});
            section_ = Section::Agent;
            return;
        }
        fail("scenario", "unknown section '" + std::string(line) + "'");
    }

    double real(const std::string& field, std::string_view v) const {
        auto r = ingest::parse_real(v);
        if (!r) fail(field, "not a number: '" + std::string(v) + "'");
        return *r;
    }

    std::int64_t duration(const std::string& field, std::string_view v) const {
        auto r = parse_duration_ms(v);
        if (!r) fail(field, "not a duration: '" + std::string(v) + "'");
        return *r;
    }

    void assign(std::string_view key, std::string_view value) {
        switch (section_) {
            case Section::Top:
                if (key == "duration" || key == "duration_ms") {
                    config_.duration_ms = duration("duration_ms", value);
                } else if (key == "seed") {
                    std::uint64_t seed = 0;
                    std::istringstream ss{std::string(value)};
                    if (!(ss >> seed) || !ss.eof()) fail("seed", "not an unsigned 64-bit integer");
                    config_.seed = seed;
                } else if (key == "accel_noise_sigma") {
                    config_.accel_noise_sigma = real("accel_noise_sigma", value);
                } else {
                    fail(std::string(key), "unknown key");
                }
                return;
            case Section::Rf: {
                auto& rf = config_.rf;
                const auto field = "rf." + std::string(key);
                if (key == "p_ref_dbm") rf.p_ref_dbm = real(field, value);
                else if (key == "pathloss_exp") rf.pathloss_exp = real(field, value);
                else if (key == "shadowing_sigma_db") rf.shadowing_sigma_db = real(field, value);
                else if (key == "scan_interval" || key == "scan_interval_ms")
                    rf.scan_interval_ms = duration("rf.scan_interval_ms", value);
                else if (key == "max_range_m") rf.max_range_m = real(field, value);
                else fail(field, "unknown key");
                return;
            }
            case Section::Agent: {
                auto& agent = config_.agents.back();
                const auto parts = words(value);
                if (key == "waypoint") {
                    const auto field = section_path() + ".waypoints[" + std::to_string(agent.waypoints.size()) + "]";
                    if (parts.size() != 3) fail(field, "expected 'waypoint = t x y'");
                    agent.waypoints.push_back(
                        {duration(field + ".t_ms", parts[0]), real(field + ".x", parts[1]), real(field + ".y", parts[2])});
                } else if (key == "sound") {
                    const auto field = section_path() + ".sound[" + std::to_string(agent.sound.size()) + "]";
                    if (parts.size() != 3) fail(field, "expected 'sound = from to amplitude'");
                    agent.sound.push_back({duration(field + ".from_ms", parts[0]), duration(field + ".to_ms", parts[1]),
                                           real(field + ".amplitude", parts[2])});
                } else {
                    fail(section_path() + "." + std::string(key), "unknown key");
                }
                return;
            }
        }
    }

    std::string name_;
    std::size_t line_ = 0;
    Section section_ = Section::Top;
    ScenarioConfig config_;
};

}  // namespace

ScenarioConfig parse_scenario(std::istream& in, const std::string& name) {
    auto config = Parser(name).run(in);
    validate(config);
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario", "cannot open " + path.string());
    return parse_scenario(in, path.string());
}

std::string format_scenario(const ScenarioConfig& c) {
    std::string out;
    auto line = [&out](std::string_view key, const std::string& value) {
        out.append(key).append(" = ").append(value).push_back('\n');
    };
    line("duration_ms", std::to_string(c.duration_ms));
    line("seed", std::to_string(c.seed));
    line("accel_noise_sigma", ingest::format_real(c.accel_noise_sigma));
    out += "\n[rf]\n";
    line("p_ref_dbm", ingest::format_real(c.rf.p_ref_dbm));
    line("pathloss_exp", ingest::format_real(c.rf.pathloss_exp));
    line("shadowing_sigma_db", ingest::format_real(c.rf.shadowing_sigma_db));
    line("scan_interval_ms", std::to_string(c.rf.scan_interval_ms));
    line("max_range_m", ingest::format_real(c.rf.max_range_m));
    for (const auto& a : c.agents) {
        out += "\n[agent " + a.id.str() + "]\n";
        for (const auto& w : a.waypoints)
            line("waypoint", std::to_string(w.t_ms) + " " + ingest::format_real(w.x) + " " + ingest::format_real(w.y));
        for (const auto& s : a.sound)
            line("sound", std::to_string(s.from_ms) + " " + std::to_string(s.to_ms) + " " +
                              ingest::format_real(s.amplitude));
    }
    return out;
}

}  // namespace nsense::sim
