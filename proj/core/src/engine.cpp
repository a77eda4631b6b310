#include "nsense/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace nsense::engine {

EngineConfig EngineConfig::for_rf(const sim::RfParams& rf) {
    EngineConfig c;
    c.pipelines.path_loss = {rf.p_ref_dbm, rf.pathloss_exp};
    return c;
}

namespace {

template <typename T>
void sort_by_time(std::vector<T>& v) {
    std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.t < b.t; });
}

template <typename T>
std::vector<T> take_minute(const std::vector<T>& v, std::size_t& pos, std::int64_t end_ms) {
    const auto begin = pos;
    while (pos < v.size() && v[pos].t.ms < end_ms) ++pos;
    return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(pos)};
}

template <typename T>
void check_window(const std::vector<T>& v, std::int64_t minute) {
    for (const auto& s : v)
        if (s.t.minute() != minute)
            throw ValidationError("sample at t=" + std::to_string(s.t.ms) + " fed to minute " + std::to_string(minute));
}

}  // namespace

TraceReplay::TraceReplay(TraceSet traces) : traces_(std::move(traces)) {
    sort_by_time(traces_.sightings);
    sort_by_time(traces_.accel);
    sort_by_time(traces_.sound);
    std::int64_t last = -1;
    if (!traces_.sightings.empty()) last = std::max(last, traces_.sightings.back().t.ms);
    if (!traces_.accel.empty()) last = std::max(last, traces_.accel.back().t.ms);
    if (!traces_.sound.empty()) last = std::max(last, traces_.sound.back().t.ms);
    minute_count_ = last < 0 ? 0 : last / kMsPerMinute + 1;
}

TraceSet TraceReplay::next() {
    TraceSet out;
    if (done()) return out;
    const std::int64_t end = (minute_ + 1) * kMsPerMinute;
    out.sightings = take_minute(traces_.sightings, sighting_pos_, end);
    out.accel = take_minute(traces_.accel, accel_pos_, end);
    out.sound = take_minute(traces_.sound, sound_pos_, end);
    ++minute_;
    return out;
}

Engine::Engine(EngineConfig config)
    : config_(config),
      contacts_(config.pipelines.gap_ms, config.pipelines.dwell_s),
      distances_(config.pipelines),
      motion_(config.pipelines),
      sound_(config.pipelines) {
    config_.fusion.validate();
}

std::vector<MinuteRecord> Engine::step(std::int64_t minute, const TraceSet& samples) {
    if (minute <= last_minute_)
        throw ValidationError("minute " + std::to_string(minute) + " does not follow " + std::to_string(last_minute_));
    check_window(samples.sightings, minute);
    check_window(samples.accel, minute);
    check_window(samples.sound, minute);
    last_minute_ = minute;

    for (const auto& s : samples.sightings) {
        contacts_.observe(s, strength_);
        distances_.observe(s);
        degrees_.observe(s);
        nodes_.insert(s.observer);
        nodes_.insert(s.subject);
    }
    for (const auto& s : samples.accel) {
        motion_.observe(s);
        nodes_.insert(s.node);
    }
    for (const auto& s : samples.sound) {
        sound_.observe(s);
        nodes_.insert(s.node);
    }

    const Tick now{(minute + 1) * kMsPerMinute - 1};
    const auto motion = motion_.close_minute();
    const auto sound = sound_.close_minute();

    fusion::PipelineSnapshot snap;
    for (const auto& id : nodes_) {
        fusion::NodeSnapshot n;
        n.degree = degrees_.degree(id, now, config_.pipelines.degree_window_ms);
        if (auto it = motion.find(id); it != motion.end()) n.motion = it->second;
        if (auto it = sound.find(id); it != sound.end()) n.sound = it->second;
        snap.nodes.emplace(id, n);
    }
    for (const auto& pair : strength_.pairs()) {
        snap.pairs.push_back({pair, strength_.strength(pair, now), distances_.distance(pair.first, pair.second, now),
                              distances_.distance(pair.second, pair.first, now)});
    }
    snapshot_ = std::move(snap);
    return fusion::fuse_minute(snapshot_, minute, config_.fusion, session_);
}

RunReport run(MinuteSource& source, const EngineConfig& config, store::RecordLog& log) {
    const auto started = std::chrono::steady_clock::now();
    Engine engine(config);
    RunReport report;
    std::vector<MinuteRecord> produced;
    while (!source.done()) {
        const auto minute = source.next_minute();
        const auto samples = source.next();
        auto records = engine.step(minute, samples);
        log.append(records);
        produced.insert(produced.end(), std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.end()));
        ++report.minutes;
    }
    report.records = produced.size();
    report.pairs = summarize(produced, &engine.social_strength());
    report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::vector<PairSummary> summarize(std::span<const MinuteRecord> records,
                                   const pipelines::SocialStrengthState* strength) {
    std::map<NodePair, std::vector<const MinuteRecord*>> by_pair;
    for (const auto& r : records) by_pair[canonical_pair(r.i, r.j)].push_back(&r);

    std::vector<PairSummary> out;
    for (const auto& [pair, recs] : by_pair) {
        PairSummary s{pair, 0, 0.0, {}, {}, std::nullopt, std::nullopt};
        s.records = recs.size();
        s.p = {0.0, recs.front()->p_ij, recs.front()->p_ij};
        s.si = {0.0, recs.front()->si_ij, recs.front()->si_ij};
        for (const auto* r : recs) {
            s.p.mean += r->p_ij;
            s.si.mean += r->si_ij;
            s.p.min = std::min(s.p.min, r->p_ij);
            s.p.max = std::max(s.p.max, r->p_ij);
            s.si.min = std::min(s.si.min, r->si_ij);
            s.si.max = std::max(s.si.max, r->si_ij);
        }
        s.p.mean /= static_cast<double>(recs.size());
        s.si.mean /= static_cast<double>(recs.size());
        if (strength) s.contact_seconds = strength->total_seconds(pair);
        s.si_symmetry = symmetry_correlation(records, pair.first, pair.second, Metric::Si);
        s.p_symmetry = symmetry_correlation(records, pair.first, pair.second, Metric::P);
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<Metric> parse_metric(std::string_view name) {
    if (name == "p" || name == "propinquity") return Metric::P;
    if (name == "si" || name == "social_interaction") return Metric::Si;
    if (name == "s" || name == "social_strength") return Metric::S;
    if (name == "d" || name == "distance") return Metric::D;
    if (name == "m" || name == "motion") return Metric::M;
    if (name == "v" || name == "sound") return Metric::V;
    if (name == "n" || name == "degree") return Metric::N;
    return std::nullopt;
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::P: return "p";
        case Metric::Si: return "si";
        case Metric::S: return "s";
        case Metric::D: return "d";
        case Metric::M: return "m";
        case Metric::V: return "v";
        case Metric::N: return "n";
    }
    return "p";
}

double metric_value(const MinuteRecord& r, Metric m) {
    switch (m) {
        case Metric::P: return r.p_ij;
        case Metric::Si: return r.si_ij;
        case Metric::S: return r.s_ij;
        case Metric::D: return r.d_ij.as_double();
        case Metric::M: return static_cast<double>(static_cast<int>(r.m_i));
        case Metric::V: return static_cast<double>(static_cast<int>(r.v_i));
        case Metric::N: return static_cast<double>(r.n_i);
    }
    return 0.0;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0 || !std::isfinite(sxy)) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> symmetry_correlation(std::span<const MinuteRecord> records, const NodeId& i,
                                           const NodeId& j, Metric metric) {
    std::map<std::int64_t, double> forward, backward;
    for (const auto& r : records) {
        if (r.i == i && r.j == j) forward[r.minute] = metric_value(r, metric);
        else if (r.i == j && r.j == i) backward[r.minute] = metric_value(r, metric);
    }
    std::vector<double> x, y;
    for (const auto& [minute, v] : forward) {
        auto it = backward.find(minute);
        if (it == backward.end() || !std::isfinite(v) || !std::isfinite(it->second)) continue;
        x.push_back(v);
        y.push_back(it->second);
    }
    return pearson(x, y);
}

}  // namespace nsense::engine
