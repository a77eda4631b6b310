#pragma once

// Deterministic multi-agent scenario generator. Agents follow scripted
// piecewise-linear waypoints; the simulator emits Bluetooth sightings through a
// log-distance path-loss model with Gaussian shadowing, 20 Hz accelerometer
// samples and 1 Hz sound amplitudes, and exposes the ground truth behind them.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsense/domain.hpp"
#include "nsense/ingest.hpp"

namespace nsense::sim {

inline constexpr double kGravity = 9.81;
inline constexpr std::int64_t kAccelPeriodMs = 50;    // 20 Hz
inline constexpr std::int64_t kSoundPeriodMs = 1000;  // 1 Hz
inline constexpr double kMoveFrequencyHz = 2.0;
inline constexpr double kMoveAmplitude = 2.0;  // m/s^2, added to the vertical axis while moving
/// Co-located agents are treated as this far apart by the RF model.
inline constexpr double kMinRfDistanceM = 0.1;

struct RfParams {
    double p_ref_dbm = -40.0;  // received power at 1 m
    double pathloss_exp = 2.7;
    double shadowing_sigma_db = 0.0;
    std::int64_t scan_interval_ms = 60'000;
    double max_range_m = 30.0;

    friend bool operator==(const RfParams&, const RfParams&) = default;
};

struct Waypoint {
    std::int64_t t_ms = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct SoundInterval {
    std::int64_t from_ms = 0;
    std::int64_t to_ms = 0;
    double amplitude = 0.0;

    friend bool operator==(const SoundInterval&, const SoundInterval&) = default;
};

struct AgentConfig {
    NodeId id;
    std::vector<Waypoint> waypoints;
    std::vector<SoundInterval> sound;  // amplitude is 0 outside every interval

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct ScenarioConfig {
    std::vector<AgentConfig> agents;
    RfParams rf;
    double accel_noise_sigma = 0.1;
    std::int64_t duration_ms = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError with the path of the first invalid field.
void validate(const ScenarioConfig& config);

/// p_ref - 10 * exp * log10(d / 1 m) + noise, clamped to [-120, 0] dBm.
/// Throws std::domain_error for d <= 0.
double rssi_from_distance(double distance_m, const RfParams& rf, double noise_db);

struct Position {
    double x = 0.0;
    double y = 0.0;
};

/// Oracle view of a scenario: positions, distances, motion and sound as scripted.
class GroundTruth {
public:
    GroundTruth() = default;
    explicit GroundTruth(const ScenarioConfig& config);

    Position position(const NodeId& agent, Tick t) const;
    double true_distance(const NodeId& i, const NodeId& j, Tick t) const;
    Motion motion(const NodeId& agent, Tick t) const;
    double scheduled_amplitude(const NodeId& agent, Tick t) const;

    std::vector<NodeId> agents() const;
    std::int64_t duration_ms() const noexcept { return duration_ms_; }

private:
    const AgentConfig& agent(const NodeId& id) const;  // throws std::out_of_range

    std::map<NodeId, AgentConfig> agents_;
    std::int64_t duration_ms_ = 0;
};

/// Incremental generator: yields the samples of one minute at a time so that
/// long scenarios never need to be held in memory.
class SimulationStream {
public:
    explicit SimulationStream(ScenarioConfig config);

    bool done() const noexcept { return next_minute_ * kMsPerMinute >= config_.duration_ms; }
    std::int64_t next_minute() const noexcept { return next_minute_; }
    std::int64_t minute_count() const noexcept;

    /// Samples with t in [m * 60 s, (m + 1) * 60 s), each sequence sorted by (t, id).
    TraceSet next();

    const GroundTruth& truth() const noexcept { return truth_; }
    const ScenarioConfig& config() const noexcept { return config_; }

private:
    struct PairStream {
        std::size_t observer;
        std::size_t subject;
        std::mt19937_64 rng;
    };

    ScenarioConfig config_;
    GroundTruth truth_;
    std::vector<NodeId> ids_;                // sorted
    std::vector<std::mt19937_64> accel_rng_;  // one substream per agent
    std::vector<PairStream> pairs_;           // one substream per ordered pair
    std::int64_t next_minute_ = 0;
};

/// Runs the whole scenario and returns every sample together with its ground truth.
std::pair<TraceSet, GroundTruth> generate(const ScenarioConfig& config);

/// Scenario file grammar (see docs/scenario-format.md).
ScenarioConfig parse_scenario(std::istream& in, const std::string& name);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioConfig& config);

/// Parses a duration literal: plain integer ms, or a number with suffix ms, s, m or h.
std::optional<std::int64_t> parse_duration_ms(std::string_view text);

}  // namespace nsense::sim
