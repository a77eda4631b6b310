#include "nsense/store.hpp"

#include <array>
#include <sstream>
#include <tuple>

#include "nsense/ingest.hpp"

namespace nsense::store {

namespace {

constexpr std::uint32_t kMaxPayload = 1u << 16;

auto key(const MinuteRecord& r) { return std::tie(r.minute, r.i, r.j); }

struct Scan {
    std::vector<MinuteRecord> records;
    std::uintmax_t valid_bytes = 0;  // offset just past the last complete record
};

Scan scan_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open log " + path.string());
    std::array<char, kLogMagic.size()> magic{};
    if (!in.read(magic.data(), magic.size()) || std::string_view(magic.data(), magic.size()) != kLogMagic)
        throw StoreError(path.string() + ": not a record log (bad magic)");

    Scan scan;
    scan.valid_bytes = kLogMagic.size();
    std::string payload;
    while (true) {
        std::array<unsigned char, 4> len_bytes{};
        if (!in.read(reinterpret_cast<char*>(len_bytes.data()), 4)) break;
        const std::uint32_t len = len_bytes[0] | (len_bytes[1] << 8) | (len_bytes[2] << 16) |
                                  (static_cast<std::uint32_t>(len_bytes[3]) << 24);
        if (len == 0 || len > kMaxPayload)
            throw StoreError(path.string() + ": corrupt record length at record " +
                             std::to_string(scan.records.size() + 1));
        payload.resize(len);
        if (!in.read(payload.data(), len)) break;
        MinuteRecord r;
        try {
            r = ingest::parse_record_row(payload, path.string(), scan.records.size() + 1);
        } catch (const ParseError& e) {
            throw StoreError(std::string("corrupt record: ") + e.what());
        }
        if (!scan.records.empty() && !(key(scan.records.back()) < key(r)))
            throw StoreError(path.string() + ": record keys out of order at record " +
                             std::to_string(scan.records.size() + 1));
        scan.records.push_back(std::move(r));
        scan.valid_bytes += 4 + len;
    }
    return scan;
}

}  // namespace

RecordLog::RecordLog(std::filesystem::path path, std::vector<MinuteRecord> records, std::ofstream out)
    : path_(std::move(path)), records_(std::move(records)), out_(std::move(out)) {}

RecordLog RecordLog::create(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot create log " + path.string());
    out.write(kLogMagic.data(), static_cast<std::streamsize>(kLogMagic.size()));
    out.flush();
    if (!out) throw StoreError("cannot write log " + path.string());
    return RecordLog(path, {}, std::move(out));
}

RecordLog RecordLog::open(const std::filesystem::path& path) {
    auto scan = scan_log(path);
    if (std::filesystem::file_size(path) != scan.valid_bytes) std::filesystem::resize_file(path, scan.valid_bytes);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw StoreError("cannot open log for append " + path.string());
    return RecordLog(path, std::move(scan.records), std::move(out));
}

std::vector<MinuteRecord> RecordLog::read(const std::filesystem::path& path) { return scan_log(path).records; }

void RecordLog::append(std::span<const MinuteRecord> records) {
    if (records.empty()) return;
    const MinuteRecord* prev = records_.empty() ? nullptr : &records_.back();
    for (const auto& r : records) {
        if (prev && !(key(*prev) < key(r)))
            throw StoreError("append out of order: (" + std::to_string(r.minute) + "," + r.i.str() + "," +
                             r.j.str() + ") does not follow (" + std::to_string(prev->minute) + "," +
                             prev->i.str() + "," + prev->j.str() + ")");
        prev = &r;
    }
    std::string buf;
    for (const auto& r : records) {
        const auto row = ingest::format_record_row(r);
        const auto len = static_cast<std::uint32_t>(row.size());
        const char len_bytes[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                                   static_cast<char>((len >> 16) & 0xff), static_cast<char>((len >> 24) & 0xff)};
        buf.append(len_bytes, 4);
        buf += row;
    }
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out_.flush();
    if (!out_) throw StoreError("write failed on " + path_.string());
    records_.insert(records_.end(), records.begin(), records.end());
}

std::vector<MinuteRecord> RecordLog::query(const NodeId& i, const NodeId& j, std::int64_t from_minute,
                                           std::int64_t to_minute) const {
    std::vector<MinuteRecord> out;
    if (from_minute > to_minute) return out;
    auto first = std::lower_bound(records_.begin(), records_.end(), from_minute,
                                  [](const MinuteRecord& r, std::int64_t m) { return r.minute < m; });
    for (auto it = first; it != records_.end() && it->minute <= to_minute; ++it)
        if (it->i == i && it->j == j) out.push_back(*it);
    return out;
}

bool ExportFilter::accepts(const MinuteRecord& r) const {
    if (pair && (r.i != pair->first || r.j != pair->second)) return false;
    if (from_minute && r.minute < *from_minute) return false;
    if (to_minute && r.minute > *to_minute) return false;
    return true;
}

void export_csv(std::span<const MinuteRecord> records, const ExportFilter& filter, std::ostream& out) {
    std::vector<MinuteRecord> selected;
    for (const auto& r : records)
        if (filter.accepts(r)) selected.push_back(r);
    ingest::write_records(out, selected);
}

void export_csv(std::span<const MinuteRecord> records, const ExportFilter& filter, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + path.string());
    export_csv(records, filter, out);
    if (!out) throw StoreError("write failed on " + path.string());
}

std::vector<AuditFinding> audit_persisted(std::span<const std::filesystem::path> files) {
    std::vector<AuditFinding> findings;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            findings.push_back({file, 0, "cannot open"});
            continue;
        }
        std::array<char, kLogMagic.size()> magic{};
        in.read(magic.data(), magic.size());
        const bool is_log = in.gcount() == static_cast<std::streamsize>(magic.size()) &&
                            std::string_view(magic.data(), magic.size()) == kLogMagic;
        if (is_log) {
            try {
                const auto scan = scan_log(file);
                if (scan.valid_bytes != std::filesystem::file_size(file))
                    findings.push_back({file, scan.records.size() + 1, "trailing bytes after last record"});
            } catch (const StoreError& e) {
                findings.push_back({file, 0, e.what()});
            }
            continue;
        }
        in.clear();
        in.seekg(0);
        std::string header;
        std::getline(in, header);
        for (auto raw : {ingest::kSightingHeader, ingest::kAccelHeader, ingest::kSoundHeader})
            if (header == raw) findings.push_back({file, 1, "raw sensor trace header '" + header + "'"});
        if (header != ingest::kRecordHeader) {
            findings.push_back({file, 1, "not a minute-record file"});
            continue;
        }
        std::string line;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                ingest::parse_record_row(line, file.string(), line_no);
            } catch (const ParseError& e) {
                findings.push_back({file, line_no, e.what()});
            }
        }
    }
    return findings;
}

}  // namespace nsense::store
