#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "nsense/engine.hpp"

namespace nsense::cli {

/// Process exit codes; stable contract for scripts.
enum ExitCode : int { kOk = 0, kInternalError = 1, kInputError = 2, kQueryError = 3 };

struct SimulateOptions {
    std::filesystem::path scenario;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
};

struct RunOptions {
    std::optional<std::filesystem::path> scenario;
    std::optional<std::filesystem::path> traces;
    std::filesystem::path out_log;
    std::optional<std::filesystem::path> report;  // defaults to <out_log>.report.json
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> epoch_ms;
};

struct AnalyzeOptions {
    std::filesystem::path log;
    std::string pair;  // "i,j"
    std::optional<std::int64_t> from_minute;
    std::optional<std::int64_t> to_minute;
    std::string metric = "si";
};

struct ExportOptions {
    std::filesystem::path log;
    std::filesystem::path out;
    std::optional<std::string> pair;
    std::optional<std::int64_t> from_minute;
    std::optional<std::int64_t> to_minute;
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);
int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `wall_clock` toggles the runtime field so that reports can be compared.
nlohmann::json report_to_json(const engine::RunReport& report, const nlohmann::json& config_echo,
                              std::optional<std::uint64_t> seed, bool wall_clock = true);

}  // namespace nsense::cli
