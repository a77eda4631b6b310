#pragma once

// Append-only, file-backed log of MinuteRecords.
//
// File layout: the 5 magic bytes "NSNS1", then repeated records of
//   [u32 little-endian payload length][payload]
// where the payload is the record's minute-record CSV row (UTF-8, no newline).
// A log cut at any record boundary is a valid log; a trailing partial record
// is ignored on read and removed when the log is reopened for appending.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsense/domain.hpp"

namespace nsense::store {

inline constexpr std::string_view kLogMagic = "NSNS1";

class RecordLog {
public:
    /// Creates (or truncates) a log file.
    static RecordLog create(const std::filesystem::path& path);
    /// Opens an existing log for appending, dropping a partial trailing record.
    static RecordLog open(const std::filesystem::path& path);
    /// Reads every complete record of a log without modifying it.
    static std::vector<MinuteRecord> read(const std::filesystem::path& path);

    RecordLog(RecordLog&&) noexcept = default;
    RecordLog& operator=(RecordLog&&) noexcept = default;

    /// Appends records whose (minute, i, j) keys strictly increase past the last
    /// stored key. The batch is rejected as a whole (StoreError) otherwise.
    void append(std::span<const MinuteRecord> records);

    /// Records of the directed pair (i, j) with minute in [from_minute, to_minute].
    std::vector<MinuteRecord> query(const NodeId& i, const NodeId& j, std::int64_t from_minute,
                                    std::int64_t to_minute) const;

    std::span<const MinuteRecord> records() const noexcept { return records_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    RecordLog(std::filesystem::path path, std::vector<MinuteRecord> records, std::ofstream out);

    std::filesystem::path path_;
    std::vector<MinuteRecord> records_;
    std::ofstream out_;
};

struct ExportFilter {
    std::optional<NodePair> pair;  // directed (i, j)
    std::optional<std::int64_t> from_minute;
    std::optional<std::int64_t> to_minute;

    bool accepts(const MinuteRecord& r) const;
};

/// Writes the selected records in the minute-record CSV format.
void export_csv(std::span<const MinuteRecord> records, const ExportFilter& filter, std::ostream& out);
void export_csv(std::span<const MinuteRecord> records, const ExportFilter& filter, const std::filesystem::path& out);

struct AuditFinding {
    std::filesystem::path file;
    std::size_t line = 0;  // CSV line, or record ordinal for logs
    std::string message;
};

/// Checks that every persisted file (record log or record CSV) holds
/// MinuteRecords only and no raw sensor samples.
std::vector<AuditFinding> audit_persisted(std::span<const std::filesystem::path> files);

}  // namespace nsense::store
