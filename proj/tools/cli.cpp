#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "nsense/ingest.hpp"
#include "nsense/simulator.hpp"
#include "nsense/store.hpp"

namespace nsense::cli {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

json stats_json(const engine::SeriesStats& s) { return {{"mean", s.mean}, {"min", s.min}, {"max", s.max}}; }

json engine_json(const engine::EngineConfig& c) {
    const auto& p = c.pipelines;
    return {
        {"gap_ms", p.gap_ms},
        {"dwell_s", p.dwell_s},
        {"alpha", p.alpha},
        {"motion_threshold", p.motion_threshold},
        {"motion_window_ms", p.motion_window_ms},
        {"sound_window_ms", p.sound_window_ms},
        {"degree_window_ms", p.degree_window_ms},
        {"staleness_ms", p.staleness_ms},
        {"sound_thresholds_db", {p.sound.quiet_below_db, p.sound.normal_below_db, p.sound.alert_below_db}},
        {"p_ref_dbm", p.path_loss.p_ref_dbm},
        {"pathloss_exp", p.path_loss.pathloss_exp},
        {"sigma2", c.fusion.sigma2},
        {"mu", c.fusion.mu},
        {"s_floor", c.fusion.s_floor},
    };
}

std::optional<NodePair> parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) return std::nullopt;
    const auto a = text.substr(0, comma);
    const auto b = text.substr(comma + 1);
    if (!NodeId::check(a).empty() || !NodeId::check(b).empty() || a == b) return std::nullopt;
    return NodePair{NodeId(a), NodeId(b)};
}

}  // namespace

json report_to_json(const engine::RunReport& report, const json& config_echo, std::optional<std::uint64_t> seed,
                    bool wall_clock) {
    json pairs = json::array();
    for (const auto& p : report.pairs) {
        pairs.push_back({
            {"i", p.pair.first.str()},
            {"j", p.pair.second.str()},
            {"records", p.records},
            {"contact_seconds", p.contact_seconds},
            {"p", stats_json(p.p)},
            {"si", stats_json(p.si)},
            {"si_symmetry_correlation", optional_number(p.si_symmetry)},
            {"p_symmetry_correlation", optional_number(p.p_symmetry)},
        });
    }
    json j = {
        {"seed", seed ? json(*seed) : json(nullptr)},
        {"config", config_echo},
        {"minutes", report.minutes},
        {"records", report.records},
        {"pairs", pairs},
    };
    if (wall_clock) j["runtime_ms"] = report.runtime_ms;
    return j;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    sim::ScenarioConfig config = sim::load_scenario(options.scenario);
    if (options.seed) config.seed = *options.seed;
    sim::SimulationStream stream(config);
    TraceSet all;
    while (!stream.done()) all.append(stream.next());
    ingest::write_traces(all, options.out_dir);
    out << "wrote " << all.sightings.size() << " sightings, " << all.accel.size() << " accel and "
        << all.sound.size() << " sound samples to " << options.out_dir.string() << "\n";
    (void)err;
    return kOk;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    if (!options.scenario && !options.traces) {
        err << "run: one of --scenario or --traces is required\n";
        return kInputError;
    }
    std::optional<sim::ScenarioConfig> scenario;
    if (options.scenario) {
        scenario = sim::load_scenario(*options.scenario);
        if (options.seed) scenario->seed = *options.seed;
    }
    const auto config =
        scenario ? engine::EngineConfig::for_rf(scenario->rf) : engine::EngineConfig::for_rf(sim::RfParams{});

    std::unique_ptr<engine::MinuteSource> source;
    json echo;
    std::optional<std::uint64_t> seed;
    if (options.traces) {
        ingest::ReadOptions read;
        read.epoch_ms = options.epoch_ms;
        auto traces = ingest::read_traces(ingest::TracePaths::in_dir(*options.traces), read);
        const auto samples = traces.samples();
        const auto report = validate_stream(samples);
        if (!report.accepted()) {
            err << "run: trace validation failed with " << report.violations.size() << " violation(s); first: "
                << report.violations.front().message << "\n";
            return kInputError;
        }
        source = std::make_unique<engine::TraceReplay>(std::move(traces));
        echo["traces"] = options.traces->generic_string();
    } else {
        seed = scenario->seed;
        source = std::make_unique<engine::SimulationReplay>(*scenario);
    }
    if (scenario) echo["scenario"] = sim::format_scenario(*scenario);
    echo["engine"] = engine_json(config);

    auto log = store::RecordLog::create(options.out_log);
    const auto report = engine::run(*source, config, log);

    const auto report_path = options.report.value_or(options.out_log.string() + ".report.json");
    std::ofstream report_out(report_path, std::ios::binary | std::ios::trunc);
    if (!report_out) throw std::runtime_error("cannot write report " + report_path.string());
    report_out << report_to_json(report, echo, seed).dump(2) << "\n";

    out << "minutes: " << report.minutes << "\nrecords: " << report.records << "\npairs: " << report.pairs.size()
        << "\n";
    for (const auto& p : report.pairs) {
        out << "  " << p.pair.first.str() << "," << p.pair.second.str() << " records=" << p.records
            << " contact_s=" << p.contact_seconds << " p_mean=" << p.p.mean << " si_mean=" << p.si.mean
            << " si_symmetry=";
        if (p.si_symmetry) out << *p.si_symmetry;
        else out << "n/a";
        out << "\n";
    }
    out << "log: " << options.out_log.string() << "\nreport: " << report_path.string() << "\n";
    return kOk;
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err) {
    const auto pair = parse_pair(options.pair);
    if (!pair) {
        err << "analyze: --pair must be 'i,j' with two distinct node ids\n";
        return kInputError;
    }
    const auto metric = engine::parse_metric(options.metric);
    if (!metric) {
        err << "analyze: unknown metric '" << options.metric << "'\n";
        return kInputError;
    }
    if (!std::filesystem::exists(options.log)) {
        err << "analyze: no such log " << options.log.string() << "\n";
        return kInputError;
    }
    const auto records = store::RecordLog::read(options.log);
    std::set<NodeId> known;
    for (const auto& r : records) {
        known.insert(r.i);
        known.insert(r.j);
    }
    for (const auto* id : {&pair->first, &pair->second}) {
        if (!known.count(*id)) {
            err << "analyze: node '" << id->str() << "' does not appear in the log\n";
            return kQueryError;
        }
    }

    // Both directions, so that the symmetry correlation can be computed.
    const store::ExportFilter range{std::nullopt, options.from_minute, options.to_minute};
    std::vector<MinuteRecord> selected;
    for (const auto& r : records) {
        const bool forward = r.i == pair->first && r.j == pair->second;
        const bool backward = r.i == pair->second && r.j == pair->first;
        if ((forward || backward) && range.accepts(r)) selected.push_back(r);
    }

    std::string buf = "minute,metric_value\n";
    double sum = 0.0, lo = 0.0, hi = 0.0;
    std::size_t n = 0;
    for (const auto& r : selected) {
        if (r.i != pair->first) continue;
        const double v = engine::metric_value(r, *metric);
        buf += std::to_string(r.minute);
        buf.push_back(',');
        ingest::append_real(buf, v);
        buf.push_back('\n');
        if (std::isfinite(v)) {
            lo = n == 0 ? v : std::min(lo, v);
            hi = n == 0 ? v : std::max(hi, v);
            sum += v;
            ++n;
        }
    }
    out << buf;
    out << "# pair=" << pair->first.str() << "," << pair->second.str() << " metric=" << engine::metric_name(*metric)
        << "\n# points=" << n;
    if (n > 0) out << " mean=" << sum / static_cast<double>(n) << " min=" << lo << " max=" << hi;
    out << "\n# symmetry_correlation=";
    if (auto c = engine::symmetry_correlation(selected, pair->first, pair->second, *metric)) out << *c;
    else out << "n/a";
    out << "\n";
    return kOk;
}

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err) {
    store::ExportFilter filter{std::nullopt, options.from_minute, options.to_minute};
    if (options.pair) {
        filter.pair = parse_pair(*options.pair);
        if (!filter.pair) {
            err << "export: --pair must be 'i,j' with two distinct node ids\n";
            return kInputError;
        }
    }
    if (!std::filesystem::exists(options.log)) {
        err << "export: no such log " << options.log.string() << "\n";
        return kInputError;
    }
    const auto records = store::RecordLog::read(options.log);
    store::export_csv(records, filter, options.out);
    out << "exported to " << options.out.string() << "\n";
    return kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"nsense: nearness inference over opportunistic sensing traces"};
    app.require_subcommand(1);

    std::string scenario, traces, out_path, report, log, pair, metric = "si";
    std::uint64_t seed = 0;
    std::int64_t epoch = 0, from_min = 0, to_min = 0;

    auto* simulate = app.add_subcommand("simulate", "Generate sensor traces from a scenario file");
    simulate->add_option("--scenario", scenario, "Scenario file")->required();
    simulate->add_option("--out", out_path, "Output directory for the trace CSVs")->required();
    auto* sim_seed = simulate->add_option("--seed", seed, "Override the scenario seed");

    auto* run = app.add_subcommand("run", "Run pipelines and fusion, writing a record log");
    auto* run_scenario = run->add_option("--scenario", scenario, "Scenario to simulate (or RF model for --traces)");
    auto* run_traces = run->add_option("--traces", traces, "Directory with sightings.csv, accel.csv, sound.csv");
    run->add_option("--out", out_path, "Record log to write")->required();
    auto* run_report = run->add_option("--report", report, "Run report path (default <out>.report.json)");
    auto* run_seed = run->add_option("--seed", seed, "Override the scenario seed");
    auto* run_epoch = run->add_option("--epoch", epoch, "Wall-clock epoch (ms) subtracted from trace timestamps");

    auto* analyze = app.add_subcommand("analyze", "Print one metric of a pair as a minute series");
    analyze->add_option("log", log, "Record log")->required();
    analyze->add_option("--pair", pair, "Directed pair i,j")->required();
    auto* an_from = analyze->add_option("--from-min", from_min, "First minute");
    auto* an_to = analyze->add_option("--to-min", to_min, "Last minute");
    analyze->add_option("--metric", metric, "One of p, si, s, d, m, v, n");

    auto* exp = app.add_subcommand("export", "Export records as minute-record CSV");
    exp->add_option("log", log, "Record log")->required();
    exp->add_option("--out", out_path, "CSV file to write")->required();
    auto* ex_pair = exp->add_option("--pair", pair, "Directed pair i,j");
    auto* ex_from = exp->add_option("--from-min", from_min, "First minute");
    auto* ex_to = exp->add_option("--to-min", to_min, "Last minute");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    auto opt_i64 = [](CLI::Option* o, std::int64_t v) { return o->count() ? std::optional<std::int64_t>(v) : std::nullopt; };

    try {
        if (*simulate) {
            return cmd_simulate({scenario, out_path, sim_seed->count() ? std::optional(seed) : std::nullopt}, out, err);
        }
        if (*run) {
            RunOptions o;
            if (run_scenario->count()) o.scenario = scenario;
            if (run_traces->count()) o.traces = traces;
            o.out_log = out_path;
            if (run_report->count()) o.report = report;
            if (run_seed->count()) o.seed = seed;
            o.epoch_ms = opt_i64(run_epoch, epoch);
            return cmd_run(o, out, err);
        }
        if (*analyze) {
            return cmd_analyze({log, pair, opt_i64(an_from, from_min), opt_i64(an_to, to_min), metric}, out, err);
        }
        if (*exp) {
            ExportOptions o{log, out_path, std::nullopt, opt_i64(ex_from, from_min), opt_i64(ex_to, to_min)};
            if (ex_pair->count()) o.pair = pair;
            return cmd_export(o, out, err);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kInputError;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kInputError;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInputError;
    } catch (const StoreError& e) {
        err << "store error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

}  // namespace nsense::cli
