#include "nsense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace nsense::sim {

namespace {

std::string agent_path(const AgentConfig& a) { return "agents[" + a.id.str() + "]"; }

Position position_of(const AgentConfig& a, std::int64_t t) {
    const auto& w = a.waypoints;
    auto next = std::upper_bound(w.begin(), w.end(), t,
                                 [](std::int64_t value, const Waypoint& p) { return value < p.t_ms; });
    if (next == w.begin()) return {w.front().x, w.front().y};
    if (next == w.end()) return {w.back().x, w.back().y};
    const auto& a0 = *(next - 1);
    const auto& a1 = *next;
    const double f = static_cast<double>(t - a0.t_ms) / static_cast<double>(a1.t_ms - a0.t_ms);
    return {a0.x + f * (a1.x - a0.x), a0.y + f * (a1.y - a0.y)};
}

Motion motion_of(const AgentConfig& a, std::int64_t t) {
    const auto& w = a.waypoints;
    auto next = std::upper_bound(w.begin(), w.end(), t,
                                 [](std::int64_t value, const Waypoint& p) { return value < p.t_ms; });
    if (next == w.begin() || next == w.end()) return Motion::Stationary;
    const auto& a0 = *(next - 1);
    return (a0.x != next->x || a0.y != next->y) ? Motion::Moving : Motion::Stationary;
}

double amplitude_of(const AgentConfig& a, std::int64_t t) {
    for (const auto& s : a.sound)
        if (t >= s.from_ms && t < s.to_ms) return s.amplitude;
    return 0.0;
}

double distance_between(const AgentConfig& a, const AgentConfig& b, std::int64_t t) {
    const auto pa = position_of(a, t);
    const auto pb = position_of(b, t);
    return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

enum class StreamTag : std::uint32_t { Accel = 1, Shadowing = 2 };

/// Substream keyed by (seed, agent ids, sensor): independent of generation order.
std::mt19937_64 substream(std::uint64_t seed, StreamTag tag, std::string_view a, std::string_view b = {}) {
    const auto ha = fnv1a(a);
    const auto hb = fnv1a(b);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(ha),
                      static_cast<std::uint32_t>(ha >> 32), static_cast<std::uint32_t>(hb),
                      static_cast<std::uint32_t>(hb >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

void validate(const ScenarioConfig& c) {
    if (c.duration_ms <= 0) throw ConfigError("duration_ms", "must be > 0");
    if (!(c.accel_noise_sigma >= 0.0) || !std::isfinite(c.accel_noise_sigma))
        throw ConfigError("accel_noise_sigma", "must be finite and >= 0");

    const auto& rf = c.rf;
    if (!std::isfinite(rf.p_ref_dbm) || rf.p_ref_dbm > kMaxRssiDbm || rf.p_ref_dbm < kMinRssiDbm)
        throw ConfigError("rf.p_ref_dbm", "must lie in [-120, 0] dBm");
    if (!(rf.pathloss_exp > 0.0) || !std::isfinite(rf.pathloss_exp))
        throw ConfigError("rf.pathloss_exp", "must be > 0");
    if (!(rf.shadowing_sigma_db >= 0.0) || !std::isfinite(rf.shadowing_sigma_db))
        throw ConfigError("rf.shadowing_sigma_db", "must be >= 0");
    if (rf.scan_interval_ms <= 0) throw ConfigError("rf.scan_interval_ms", "must be > 0");
    if (!(rf.max_range_m > 0.0) || !std::isfinite(rf.max_range_m))
        throw ConfigError("rf.max_range_m", "must be > 0");

    if (c.agents.empty()) throw ConfigError("agents", "at least one agent is required");
    std::set<NodeId> seen;
    for (const auto& a : c.agents) {
        const auto base = agent_path(a);
        if (!seen.insert(a.id).second) throw ConfigError(base + ".id", "duplicate agent id");
        if (a.waypoints.empty()) throw ConfigError(base + ".waypoints", "at least one waypoint is required");
        for (std::size_t k = 0; k < a.waypoints.size(); ++k) {
            const auto& w = a.waypoints[k];
            const auto path = base + ".waypoints[" + std::to_string(k) + "]";
            if (k == 0 && w.t_ms != 0) throw ConfigError(path + ".t_ms", "first waypoint must be at t=0");
            if (k > 0 && w.t_ms <= a.waypoints[k - 1].t_ms)
                throw ConfigError(path + ".t_ms", "waypoints must be strictly time-sorted");
            if (!std::isfinite(w.x)) throw ConfigError(path + ".x", "must be finite");
            if (!std::isfinite(w.y)) throw ConfigError(path + ".y", "must be finite");
        }
        for (std::size_t k = 0; k < a.sound.size(); ++k) {
            const auto& s = a.sound[k];
            const auto path = base + ".sound[" + std::to_string(k) + "]";
            if (s.from_ms < 0 || s.from_ms > c.duration_ms)
                throw ConfigError(path + ".from_ms", "must lie within [0, duration_ms]");
            if (s.to_ms <= s.from_ms || s.to_ms > c.duration_ms)
                throw ConfigError(path + ".to_ms", "must lie within (from_ms, duration_ms]");
            if (!(s.amplitude >= 0.0 && s.amplitude <= 1.0))
                throw ConfigError(path + ".amplitude", "must lie within [0, 1]");
        }
    }
}

double rssi_from_distance(double distance_m, const RfParams& rf, double noise_db) {
    if (!(distance_m > 0.0)) throw std::domain_error("rssi_from_distance: distance must be > 0");
    const double rssi = rf.p_ref_dbm - 10.0 * rf.pathloss_exp * std::log10(distance_m) + noise_db;
    return std::clamp(rssi, kMinRssiDbm, kMaxRssiDbm);
}

GroundTruth::GroundTruth(const ScenarioConfig& config) : duration_ms_(config.duration_ms) {
    for (const auto& a : config.agents) agents_.emplace(a.id, a);
}

const AgentConfig& GroundTruth::agent(const NodeId& id) const {
    auto it = agents_.find(id);
    if (it == agents_.end()) throw std::out_of_range("unknown agent '" + id.str() + "'");
    return it->second;
}

Position GroundTruth::position(const NodeId& id, Tick t) const { return position_of(agent(id), t.ms); }

double GroundTruth::true_distance(const NodeId& i, const NodeId& j, Tick t) const {
    return distance_between(agent(i), agent(j), t.ms);
}

Motion GroundTruth::motion(const NodeId& id, Tick t) const { return motion_of(agent(id), t.ms); }

double GroundTruth::scheduled_amplitude(const NodeId& id, Tick t) const { return amplitude_of(agent(id), t.ms); }

std::vector<NodeId> GroundTruth::agents() const {
    std::vector<NodeId> out;
    for (const auto& [id, a] : agents_) out.push_back(id);
    return out;
}

SimulationStream::SimulationStream(ScenarioConfig config) : config_(std::move(config)) {
    validate(config_);
    std::sort(config_.agents.begin(), config_.agents.end(),
              [](const AgentConfig& a, const AgentConfig& b) { return a.id < b.id; });
    truth_ = GroundTruth(config_);
    for (const auto& a : config_.agents) {
        ids_.push_back(a.id);
        accel_rng_.push_back(substream(config_.seed, StreamTag::Accel, a.id.str()));
    }
    for (std::size_t o = 0; o < ids_.size(); ++o)
        for (std::size_t s = 0; s < ids_.size(); ++s)
            if (o != s)
                pairs_.push_back({o, s, substream(config_.seed, StreamTag::Shadowing, ids_[o].str(), ids_[s].str())});
}

std::int64_t SimulationStream::minute_count() const noexcept {
    return (config_.duration_ms + kMsPerMinute - 1) / kMsPerMinute;
}

TraceSet SimulationStream::next() {
    TraceSet out;
    if (done()) return out;
    const std::int64_t begin = next_minute_ * kMsPerMinute;
    const std::int64_t end = std::min(begin + kMsPerMinute, config_.duration_ms);
    ++next_minute_;

    const auto& agents = config_.agents;
    const auto& rf = config_.rf;

    // Sightings at every scan tick, for every ordered pair within range.
    const std::int64_t first_scan = (begin + rf.scan_interval_ms - 1) / rf.scan_interval_ms * rf.scan_interval_ms;
    for (std::int64_t t = first_scan; t < end; t += rf.scan_interval_ms) {
        for (auto& p : pairs_) {
            const double d = distance_between(agents[p.observer], agents[p.subject], t);
            if (d > rf.max_range_m) continue;
            double noise = 0.0;
            if (rf.shadowing_sigma_db > 0.0)
                noise = std::normal_distribution<double>(0.0, rf.shadowing_sigma_db)(p.rng);
            out.sightings.push_back(
                {Tick{t}, ids_[p.observer], ids_[p.subject], rssi_from_distance(std::max(d, kMinRfDistanceM), rf, noise)});
        }
    }

    // Accelerometer: gravity plus noise; moving adds a 2 Hz oscillation on the vertical axis.
    const std::int64_t first_accel = (begin + kAccelPeriodMs - 1) / kAccelPeriodMs * kAccelPeriodMs;
    const double sigma = config_.accel_noise_sigma;
    out.accel.reserve(static_cast<std::size_t>((end - first_accel) / kAccelPeriodMs + 1) * agents.size());
    for (std::int64_t t = first_accel; t < end; t += kAccelPeriodMs) {
        for (std::size_t k = 0; k < agents.size(); ++k) {
            auto& rng = accel_rng_[k];
            double ax = 0.0, ay = 0.0, az = kGravity;
            if (sigma > 0.0) {
                std::normal_distribution<double> noise(0.0, sigma);
                ax += noise(rng);
                ay += noise(rng);
                az += noise(rng);
            }
            if (motion_of(agents[k], t) == Motion::Moving) {
                const double seconds = static_cast<double>(t) / 1000.0;
                az += kMoveAmplitude * std::sin(2.0 * std::numbers::pi * kMoveFrequencyHz * seconds);
            }
            out.accel.push_back({Tick{t}, ids_[k], ax, ay, az});
        }
    }

    const std::int64_t first_sound = (begin + kSoundPeriodMs - 1) / kSoundPeriodMs * kSoundPeriodMs;
    for (std::int64_t t = first_sound; t < end; t += kSoundPeriodMs)
        for (std::size_t k = 0; k < agents.size(); ++k)
            out.sound.push_back({Tick{t}, ids_[k], amplitude_of(agents[k], t)});

    return out;
}

std::pair<TraceSet, GroundTruth> generate(const ScenarioConfig& config) {
    SimulationStream stream(config);
    TraceSet all;
    while (!stream.done()) all.append(stream.next());
    return {std::move(all), stream.truth()};
}

}  // namespace nsense::sim
