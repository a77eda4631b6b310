#pragma once

// Identities, time and sample types shared by every module.

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nsense/errors.hpp"

namespace nsense {

inline constexpr std::int64_t kMsPerSecond = 1000;
inline constexpr std::int64_t kMsPerMinute = 60 * kMsPerSecond;
inline constexpr std::int64_t kMsPerHour = 60 * kMsPerMinute;
inline constexpr std::int64_t kMsPerDay = 24 * kMsPerHour;

inline constexpr double kMinRssiDbm = -120.0;
inline constexpr double kMaxRssiDbm = 0.0;

/// Device identity. Non-empty, at most 64 characters, no commas or line breaks
/// so that it can be written verbatim into CSV fields.
class NodeId {
public:
    static constexpr std::size_t kMaxLength = 64;

    explicit NodeId(std::string value);

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const NodeId&, const NodeId&) = default;
    friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) {
        return a.value_.compare(b.value_) <=> 0;
    }

    /// Returns an empty string when `value` is a valid id, else the reason.
    static std::string check(std::string_view value);

private:
    std::string value_;
};

/// Milliseconds since scenario epoch.
struct Tick {
    std::int64_t ms = 0;

    constexpr std::int64_t minute() const noexcept { return ms / kMsPerMinute; }
    constexpr int hour_slot() const noexcept { return static_cast<int>((ms / kMsPerHour) % 24); }
    constexpr std::int64_t day() const noexcept { return ms / kMsPerDay; }

    friend constexpr auto operator<=>(const Tick&, const Tick&) = default;
};

/// Builds a Tick, rejecting negative values.
Tick make_tick(std::int64_t ms);

struct BtSighting {
    Tick t;
    NodeId observer;
    NodeId subject;
    double rssi_dbm = 0.0;

    friend bool operator==(const BtSighting&, const BtSighting&) = default;
};

struct AccelSample {
    Tick t;
    NodeId node;
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;

    friend bool operator==(const AccelSample&, const AccelSample&) = default;
};

struct SoundSample {
    Tick t;
    NodeId node;
    double amplitude = 0.0;

    friend bool operator==(const SoundSample&, const SoundSample&) = default;
};

using SensorSample = std::variant<BtSighting, AccelSample, SoundSample>;

Tick sample_time(const SensorSample& s);

enum class Motion : int { Stationary = 1, Moving = 2 };
enum class SoundClass : int { Quiet = 0, Normal = 1, Alert = 2, Noisy = 3 };
enum class Nearness : int { Low = 0, Avg = 1, High = 2 };

std::string_view to_string(Nearness n);
Nearness nearness_from_string(std::string_view s);  // throws ValidationError

/// Pairwise distance estimate. OUT_OF_RANGE means no fresh estimate exists and
/// the utility functions must not be evaluated on it.
class Distance {
public:
    static Distance meters(double m);  // throws ValidationError for negative or non-finite
    static constexpr Distance out_of_range() { return Distance{}; }

    constexpr bool in_range() const noexcept { return in_range_; }
    double value_m() const;  // throws std::logic_error when out of range

    /// Meters, or +inf for OUT_OF_RANGE; matches the CSV encoding.
    constexpr double as_double() const noexcept {
        return in_range_ ? meters_ : std::numeric_limits<double>::infinity();
    }

    friend bool operator==(const Distance&, const Distance&) = default;

private:
    constexpr Distance() = default;
    constexpr explicit Distance(double m) : meters_(m), in_range_(true) {}

    double meters_ = 0.0;
    bool in_range_ = false;
};

struct MinuteRecord {
    std::int64_t minute = 0;
    NodeId i{"?"};
    NodeId j{"?"};
    int n_i = 0;
    Motion m_i = Motion::Stationary;
    SoundClass v_i = SoundClass::Quiet;
    Distance d_ij = Distance::out_of_range();
    double s_ij = 0.0;
    double p_ij = 0.0;
    double si_ij = 0.0;
    Nearness nearness = Nearness::Low;

    friend bool operator==(const MinuteRecord&, const MinuteRecord&) = default;
};

using NodePair = std::pair<NodeId, NodeId>;

/// Orders a pair so that both argument orders map to the same key.
NodePair canonical_pair(const NodeId& a, const NodeId& b);

enum class ViolationKind { NonMonotoneTime, OutOfRange, SelfSighting };

struct Violation {
    ViolationKind kind;
    std::size_t index;  // position in the validated sequence
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool accepted() const noexcept { return violations.empty(); }
    std::size_t count(ViolationKind kind) const;
};

/// Checks per-(node, sensor) monotone timestamps, field ranges and self-sightings.
/// Sightings form one stream per observer.
ValidationReport validate_stream(std::span<const SensorSample> samples);

}  // namespace nsense
