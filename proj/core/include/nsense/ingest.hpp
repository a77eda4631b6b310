#pragma once

// CSV codecs for sensor traces and minute records. These layouts are the
// public data contract of the project:
//
//   sightings.csv  t_ms,observer,subject,rssi_dbm
//   accel.csv      t_ms,node,ax,ay,az
//   sound.csv      t_ms,node,amplitude
//   records        minute,i,j,n_i,m_i,v_i,d_m,s_s,p,si,nearness   (d_m = inf when OUT_OF_RANGE)
//
// Headers are mandatory, fields are comma separated and lines end with '\n'.
// Reals are written in shortest round-trip form.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsense/domain.hpp"

namespace nsense::ingest {

inline constexpr std::string_view kSightingHeader = "t_ms,observer,subject,rssi_dbm";
inline constexpr std::string_view kAccelHeader = "t_ms,node,ax,ay,az";
inline constexpr std::string_view kSoundHeader = "t_ms,node,amplitude";
inline constexpr std::string_view kRecordHeader = "minute,i,j,n_i,m_i,v_i,d_m,s_s,p,si,nearness";

inline constexpr std::string_view kSightingFile = "sightings.csv";
inline constexpr std::string_view kAccelFile = "accel.csv";
inline constexpr std::string_view kSoundFile = "sound.csv";

}  // namespace nsense::ingest

namespace nsense {

/// Time-sorted sensor samples, one sequence per sensor kind.
struct TraceSet {
    std::vector<BtSighting> sightings;
    std::vector<AccelSample> accel;
    std::vector<SoundSample> sound;

    bool empty() const noexcept { return sightings.empty() && accel.empty() && sound.empty(); }
    std::size_t size() const noexcept { return sightings.size() + accel.size() + sound.size(); }

    /// Moves the samples of `other` to the end of each sequence.
    void append(TraceSet&& other);

    /// All samples as SensorSample values, sightings first, then accel, then sound.
    std::vector<SensorSample> samples() const;

    friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

}  // namespace nsense

namespace nsense::ingest {

struct TracePaths {
    std::filesystem::path sightings;
    std::filesystem::path accel;
    std::filesystem::path sound;

    static TracePaths in_dir(const std::filesystem::path& dir);
};

struct ReadOptions {
    /// When set, input timestamps are wall-clock ms and this epoch is subtracted.
    std::optional<std::int64_t> epoch_ms;
};

/// Parses and validates the three trace files. Throws ParseError naming the
/// first offending line and column.
TraceSet read_traces(const TracePaths& paths, const ReadOptions& options = {});

/// Writes sightings.csv, accel.csv and sound.csv into `dir` (created if missing).
void write_traces(const TraceSet& ts, const std::filesystem::path& dir);

// Stream-level codecs; `name` is used in error messages.
std::vector<BtSighting> read_sightings(std::istream& in, const std::string& name, const ReadOptions& options = {});
std::vector<AccelSample> read_accel(std::istream& in, const std::string& name, const ReadOptions& options = {});
std::vector<SoundSample> read_sound(std::istream& in, const std::string& name, const ReadOptions& options = {});
void write_sightings(std::ostream& out, std::span<const BtSighting> rows);
void write_accel(std::ostream& out, std::span<const AccelSample> rows);
void write_sound(std::ostream& out, std::span<const SoundSample> rows);

/// Shortest representation that parses back to the identical double; `inf` for +infinity.
std::string format_real(double x);
void append_real(std::string& out, double x);
std::optional<double> parse_real(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string format_record_row(const MinuteRecord& r);
/// Decodes one record row (no trailing newline). Throws ParseError.
MinuteRecord parse_record_row(std::string_view row, const std::string& name, std::size_t line);

void write_records(std::ostream& out, std::span<const MinuteRecord> records);
std::vector<MinuteRecord> read_records(std::istream& in, const std::string& name);
std::vector<MinuteRecord> read_records(const std::filesystem::path& path);

/// Splits on ',' without any quoting rules.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace nsense::ingest
