#include "nsense/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace nsense {

std::string NodeId::check(std::string_view value) {
    if (value.empty()) return "node id is empty";
    if (value.size() > kMaxLength) return "node id longer than 64 characters";
    if (value.find_first_of(",\r\n") != std::string_view::npos)
        return "node id contains a comma or line break";
    return {};
}

NodeId::NodeId(std::string value) : value_(std::move(value)) {
    if (auto why = check(value_); !why.empty()) throw ValidationError(why + " ('" + value_ + "')");
}

Tick make_tick(std::int64_t ms) {
    if (ms < 0) throw ValidationError("negative tick " + std::to_string(ms));
    return Tick{ms};
}

Tick sample_time(const SensorSample& s) {
    return std::visit([](const auto& v) { return v.t; }, s);
}

std::string_view to_string(Nearness n) {
    switch (n) {
        case Nearness::Low: return "Low";
        case Nearness::Avg: return "Avg";
        case Nearness::High: return "High";
    }
    return "Low";
}

Nearness nearness_from_string(std::string_view s) {
    if (s == "Low") return Nearness::Low;
    if (s == "Avg") return Nearness::Avg;
    if (s == "High") return Nearness::High;
    throw ValidationError("unknown nearness label '" + std::string(s) + "'");
}

Distance Distance::meters(double m) {
    if (!std::isfinite(m) || m < 0.0) throw ValidationError("distance must be finite and >= 0");
    return Distance{m};
}

double Distance::value_m() const {
    if (!in_range_) throw std::logic_error("distance is OUT_OF_RANGE");
    return meters_;
}

NodePair canonical_pair(const NodeId& a, const NodeId& b) {
    if (a == b) throw ValidationError("pair of identical node ids '" + a.str() + "'");
    return a < b ? NodePair{a, b} : NodePair{b, a};
}

std::size_t ValidationReport::count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [kind](const Violation& v) { return v.kind == kind; }));
}

namespace {

enum class Sensor { Bluetooth, Accel, Sound };

struct Checker {
    ValidationReport report;
    std::map<std::pair<std::string, Sensor>, std::int64_t> last_t;
    std::size_t index = 0;

    void add(ViolationKind kind, std::string msg) {
        report.violations.push_back({kind, index, std::move(msg)});
    }

    void time(const NodeId& node, Sensor sensor, Tick t) {
        if (t.ms < 0) add(ViolationKind::OutOfRange, "negative timestamp");
        auto [it, inserted] = last_t.try_emplace({node.str(), sensor}, t.ms);
        if (!inserted) {
            if (t.ms < it->second)
                add(ViolationKind::NonMonotoneTime, "timestamp " + std::to_string(t.ms) + " precedes " +
                                                        std::to_string(it->second) + " for " + node.str());
            it->second = std::max(it->second, t.ms);
        }
    }

    void operator()(const BtSighting& s) {
        time(s.observer, Sensor::Bluetooth, s.t);
        if (!(s.rssi_dbm >= kMinRssiDbm && s.rssi_dbm <= kMaxRssiDbm))
            add(ViolationKind::OutOfRange, "rssi outside [-120, 0] dBm");
        if (s.observer == s.subject) add(ViolationKind::SelfSighting, "node sighted itself");
    }

    void operator()(const AccelSample& s) {
        time(s.node, Sensor::Accel, s.t);
        if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az))
            add(ViolationKind::OutOfRange, "non-finite acceleration");
    }

    void operator()(const SoundSample& s) {
        time(s.node, Sensor::Sound, s.t);
        if (!(s.amplitude >= 0.0 && s.amplitude <= 1.0))
            add(ViolationKind::OutOfRange, "amplitude outside [0, 1]");
    }
};

}  // namespace

ValidationReport validate_stream(std::span<const SensorSample> samples) {
    Checker checker;
    for (const auto& s : samples) {
        std::visit(checker, s);
        ++checker.index;
    }
    return std::move(checker.report);
}

}  // namespace nsense
