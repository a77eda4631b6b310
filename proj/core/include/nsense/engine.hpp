#pragma once

// Minute-tick runtime: feeds each minute's samples through the pipelines,
// snapshots their outputs at the minute boundary, fuses them and hands the
// records to the store. Raw samples are dropped once consumed.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsense/domain.hpp"
#include "nsense/fusion.hpp"
#include "nsense/ingest.hpp"
#include "nsense/pipelines.hpp"
#include "nsense/simulator.hpp"
#include "nsense/store.hpp"

namespace nsense::engine {

struct EngineConfig {
    pipelines::PipelineParams pipelines;
    fusion::FusionParams fusion;

    /// Defaults with the path-loss parameters taken from a scenario's RF model.
    static EngineConfig for_rf(const sim::RfParams& rf);
};

/// Supplies the samples of consecutive minutes, starting at minute 0.
class MinuteSource {
public:
    virtual ~MinuteSource() = default;
    virtual bool done() const = 0;
    virtual std::int64_t next_minute() const = 0;
    virtual TraceSet next() = 0;
};

/// Replays a recorded TraceSet minute by minute.
class TraceReplay final : public MinuteSource {
public:
    explicit TraceReplay(TraceSet traces);

    bool done() const override { return minute_ >= minute_count_; }
    std::int64_t next_minute() const override { return minute_; }
    TraceSet next() override;

private:
    TraceSet traces_;
    std::size_t sighting_pos_ = 0;
    std::size_t accel_pos_ = 0;
    std::size_t sound_pos_ = 0;
    std::int64_t minute_ = 0;
    std::int64_t minute_count_ = 0;
};

/// Generates a scenario on the fly; nothing is materialized beyond one minute.
class SimulationReplay final : public MinuteSource {
public:
    explicit SimulationReplay(sim::ScenarioConfig config) : stream_(std::move(config)) {}

    bool done() const override { return stream_.done(); }
    std::int64_t next_minute() const override { return stream_.next_minute(); }
    TraceSet next() override { return stream_.next(); }

    const sim::GroundTruth& truth() const noexcept { return stream_.truth(); }

private:
    sim::SimulationStream stream_;
};

class Engine {
public:
    explicit Engine(EngineConfig config);

    /// Processes the samples of `minute` (all with t inside that minute, each
    /// sequence time-sorted) and returns the fused records for it.
    std::vector<MinuteRecord> step(std::int64_t minute, const TraceSet& samples);

    /// Pipeline outputs as of the end of the last processed minute.
    const fusion::PipelineSnapshot& snapshot() const noexcept { return snapshot_; }
    const pipelines::SocialStrengthState& social_strength() const noexcept { return strength_; }
    const EngineConfig& config() const noexcept { return config_; }

private:
    EngineConfig config_;
    pipelines::SocialStrengthState strength_;
    pipelines::ContactTracker contacts_;
    pipelines::DistanceTracker distances_;
    pipelines::DegreeTracker degrees_;
    pipelines::MotionTracker motion_;
    pipelines::SoundTracker sound_;
    fusion::SessionStats session_;
    fusion::PipelineSnapshot snapshot_;
    std::set<NodeId> nodes_;
    std::int64_t last_minute_ = -1;
};

struct SeriesStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct PairSummary {
    NodePair pair;  // canonical
    std::size_t records = 0;
    double contact_seconds = 0.0;
    SeriesStats p;
    SeriesStats si;
    std::optional<double> si_symmetry;  // Pearson of si(i->j) vs si(j->i); empty when undefined
    std::optional<double> p_symmetry;
};

struct RunReport {
    std::int64_t minutes = 0;
    std::size_t records = 0;
    std::vector<PairSummary> pairs;
    double runtime_ms = 0.0;
};

/// Runs every minute of `source` through a fresh engine, appending to `log`.
RunReport run(MinuteSource& source, const EngineConfig& config, store::RecordLog& log);

/// Per-pair summary over a record sequence; contact seconds come from `strength` when given.
std::vector<PairSummary> summarize(std::span<const MinuteRecord> records,
                                   const pipelines::SocialStrengthState* strength = nullptr);

enum class Metric { P, Si, S, D, M, V, N };

/// Accepts p, si, s, d, m, v, n and the long names propinquity,
/// social_interaction, social_strength, distance, motion, sound, degree.
std::optional<Metric> parse_metric(std::string_view name);
std::string_view metric_name(Metric m);
double metric_value(const MinuteRecord& r, Metric m);

/// Pearson correlation; empty for fewer than two points or zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Correlation of the (i, j) and (j, i) series of `metric`, aligned by minute.
std::optional<double> symmetry_correlation(std::span<const MinuteRecord> records, const NodeId& i,
                                           const NodeId& j, Metric metric);

}  // namespace nsense::engine
