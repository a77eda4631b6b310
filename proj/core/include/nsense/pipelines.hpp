#pragma once

// The four sensing pipelines: proximity (contacts -> social strength), relative
// distance (RSSI -> smoothed meters), motion (accelerometer -> stationary/moving)
// and environmental sound (amplitude -> sound class), plus node degree.
//
// Each pipeline has a pure per-window operation and an incremental tracker the
// engine feeds sample by sample.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nsense/domain.hpp"

namespace nsense::pipelines {

struct PathLossParams {
    double p_ref_dbm = -40.0;
    double pathloss_exp = 2.7;
};

/// Upper edges of the quiet, normal and alert bands in dB; anything above is noisy.
struct SoundThresholds {
    double quiet_below_db = -60.0;
    double normal_below_db = -30.0;
    double alert_below_db = -10.0;
};

inline constexpr double kAmplitudeFloor = 1e-5;
inline constexpr std::size_t kMinMotionWindowSamples = 10;

struct PipelineParams {
    std::int64_t gap_ms = 120'000;
    double dwell_s = 60.0;
    double alpha = 0.3;
    double motion_threshold = 0.5;  // m/s^2, std of |a|
    std::int64_t motion_window_ms = 5'000;
    std::int64_t sound_window_ms = 1'000;
    std::int64_t degree_window_ms = 120'000;
    std::int64_t staleness_ms = 300'000;
    SoundThresholds sound;
    PathLossParams path_loss;
};

// --- proximity --------------------------------------------------------------

struct ContactEvent {
    NodePair pair;
    Tick start;
    Tick end;
    double duration_s = 0.0;  // (end - start) + dwell

    friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

/// Merges the sightings of one canonical pair (either direction) into contacts.
/// Consecutive sightings at most `gap_ms` apart belong to the same contact.
/// Throws ValidationError for unsorted input or sightings of several pairs.
std::vector<ContactEvent> detect_contacts(std::span<const BtSighting> sightings, std::int64_t gap_ms, double dwell_s);

/// Contact seconds per (pair, day, hour slot). A contact covers
/// [start, start + duration); overlapping coverage is credited once.
/// Coverage must be added in time order per pair: anything before the
/// pair's credited high-water mark is ignored.
class SocialStrengthState {
public:
    void add(const ContactEvent& contact);
    void credit(const NodePair& pair, std::int64_t from_ms, std::int64_t to_ms);

    /// Mean contact seconds in the hour slot of `now` over days 0..day(now).
    double strength(const NodePair& pair, Tick now) const;

    double seconds(const NodePair& pair, std::int64_t day, int slot) const;
    double total_seconds(const NodePair& pair) const;
    bool has_contact(const NodePair& pair) const;
    std::vector<NodePair> pairs() const;

private:
    struct History {
        std::vector<std::array<double, 24>> days;
        std::int64_t credited_until = std::numeric_limits<std::int64_t>::min();
        double total_s = 0.0;
    };

    std::map<NodePair, History> pairs_;
};

/// Adds `contacts` (all of one pair) and returns s(i,j) at `now`.
double update_social_strength(SocialStrengthState& state, const NodePair& pair,
                              std::span<const ContactEvent> contacts, Tick now);

/// Incremental contact detection; credits coverage into a SocialStrengthState
/// as sightings arrive. Sightings must arrive in time order.
class ContactTracker {
public:
    ContactTracker(std::int64_t gap_ms, double dwell_s) : gap_ms_(gap_ms), dwell_ms_(dwell_s * 1000.0) {}

    void observe(const BtSighting& s, SocialStrengthState& strength);

    /// Contacts seen so far for `pair`, the open one included.
    std::vector<ContactEvent> contacts(const NodePair& pair) const;

private:
    struct Open {
        std::int64_t start;
        std::int64_t last;
    };

    std::int64_t gap_ms_;
    double dwell_ms_;
    std::map<NodePair, std::vector<ContactEvent>> closed_;
    std::map<NodePair, Open> open_;
};

// --- relative distance ------------------------------------------------------

/// 1 m * 10^((p_ref - rssi) / (10 * exp)); inverse of the noiseless path-loss model.
double estimate_distance_raw(double rssi_dbm, const PathLossParams& params);

struct DistanceState {
    double ema_m = 0.0;
    Tick last_update;
    double alpha = 0.3;
    bool initialized = false;
};

/// ema <- alpha * raw + (1 - alpha) * ema; the first observation sets ema = raw.
double ema_update(DistanceState& state, double raw_m, Tick now);

/// OUT_OF_RANGE when never updated or when now - last_update > staleness_ms.
Distance current_distance(const DistanceState& state, Tick now, std::int64_t staleness_ms);

/// Per directed (observer, subject) distance estimates. A pair that went stale
/// restarts its average on the next sighting.
class DistanceTracker {
public:
    explicit DistanceTracker(const PipelineParams& params) : params_(params) {}

    void observe(const BtSighting& s);
    Distance distance(const NodeId& observer, const NodeId& subject, Tick now) const;
    const DistanceState* state(const NodeId& observer, const NodeId& subject) const;

private:
    PipelineParams params_;
    std::map<NodePair, DistanceState> states_;
};

// --- motion -----------------------------------------------------------------

struct MotionResult {
    Motion label = Motion::Stationary;
    double feature = 0.0;  // population std of |a| over the window
};

/// Throws ValidationError when the window holds fewer than 10 samples.
MotionResult classify_motion(std::span<const AccelSample> window, double threshold_ms2);

/// Buffers accelerometer samples into fixed windows per node and keeps the
/// window labels of the current minute.
class MotionTracker {
public:
    explicit MotionTracker(const PipelineParams& params) : params_(params) {}

    void observe(const AccelSample& s);
    /// Classifies any pending windows and returns the minute label per node:
    /// moving when at least half of the minute's windows were moving; nodes
    /// without windows keep their previous label.
    std::map<NodeId, Motion> close_minute();

private:
    struct NodeState {
        std::int64_t window = -1;
        std::vector<AccelSample> buffer;
        int moving = 0;
        int stationary = 0;
        Motion last = Motion::Stationary;
    };

    void flush(NodeState& n);

    PipelineParams params_;
    std::map<NodeId, NodeState> nodes_;
};

// --- sound ------------------------------------------------------------------

struct SoundResult {
    double level_db = 0.0;
    SoundClass v = SoundClass::Quiet;
};

SoundClass sound_class_for_level(double level_db, const SoundThresholds& thresholds);

/// level = 20 log10(max(max amplitude, 1e-5)). Throws ValidationError for an empty window.
SoundResult classify_sound(std::span<const SoundSample> window, const SoundThresholds& thresholds);

/// Per node 1 s windows; the minute's class is the most frequent window class
/// (lowest class wins ties). Nodes without windows keep their previous class.
class SoundTracker {
public:
    explicit SoundTracker(const PipelineParams& params) : params_(params) {}

    void observe(const SoundSample& s);
    std::map<NodeId, SoundClass> close_minute();

private:
    struct NodeState {
        std::int64_t window = -1;
        std::vector<SoundSample> buffer;
        std::array<int, 4> counts{};
        SoundClass last = SoundClass::Quiet;
    };

    void flush(NodeState& n);

    PipelineParams params_;
    std::map<NodeId, NodeState> nodes_;
};

// --- node degree ------------------------------------------------------------

/// Distinct subjects sighted by `node` with t in [now - window_ms, now].
int node_degree(std::span<const BtSighting> sightings, const NodeId& node, Tick now, std::int64_t window_ms);

class DegreeTracker {
public:
    void observe(const BtSighting& s);
    int degree(const NodeId& node, Tick now, std::int64_t window_ms) const;

private:
    std::map<NodeId, std::map<NodeId, std::int64_t>> last_seen_;
};

}  // namespace nsense::pipelines
