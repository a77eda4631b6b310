#include "nsense/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nsense::pipelines {

namespace {

std::int64_t coverage_end(std::int64_t t, double dwell_ms) {
    return t + static_cast<std::int64_t>(std::llround(dwell_ms));
}

}  // namespace

std::vector<ContactEvent> detect_contacts(std::span<const BtSighting> sightings, std::int64_t gap_ms, double dwell_s) {
    std::vector<ContactEvent> out;
    if (sightings.empty()) return out;
    const auto pair = canonical_pair(sightings.front().observer, sightings.front().subject);
    auto close = [&](std::int64_t start, std::int64_t end) {
        out.push_back({pair, Tick{start}, Tick{end}, static_cast<double>(end - start) / 1000.0 + dwell_s});
    };
    std::int64_t start = sightings.front().t.ms;
    std::int64_t last = start;
    for (std::size_t k = 0; k < sightings.size(); ++k) {
        const auto& s = sightings[k];
        if (canonical_pair(s.observer, s.subject) != pair)
            throw ValidationError("detect_contacts: sightings of more than one pair");
        if (s.t.ms < last) throw ValidationError("detect_contacts: sightings are not time-sorted");
        if (s.t.ms - last > gap_ms) {
            close(start, last);
            start = s.t.ms;
        }
        last = s.t.ms;
    }
    close(start, last);
    return out;
}

void SocialStrengthState::credit(const NodePair& pair, std::int64_t from_ms, std::int64_t to_ms) {
    auto& h = pairs_[pair];
    from_ms = std::max(from_ms, h.credited_until);
    if (to_ms <= from_ms) return;
    h.credited_until = to_ms;
    while (from_ms < to_ms) {
        const std::int64_t hour = from_ms / kMsPerHour;
        const std::int64_t seg_end = std::min(to_ms, (hour + 1) * kMsPerHour);
        const auto day = static_cast<std::size_t>(from_ms / kMsPerDay);
        if (h.days.size() <= day) h.days.resize(day + 1, std::array<double, 24>{});
        const double seconds = static_cast<double>(seg_end - from_ms) / 1000.0;
        h.days[day][static_cast<std::size_t>(hour % 24)] += seconds;
        h.total_s += seconds;
        from_ms = seg_end;
    }
}

void SocialStrengthState::add(const ContactEvent& c) {
    credit(c.pair, c.start.ms, c.start.ms + static_cast<std::int64_t>(std::llround(c.duration_s * 1000.0)));
}

double SocialStrengthState::strength(const NodePair& pair, Tick now) const {
    auto it = pairs_.find(pair);
    if (it == pairs_.end()) return 0.0;
    const auto& days = it->second.days;
    const auto today = static_cast<std::size_t>(now.day());
    const auto slot = static_cast<std::size_t>(now.hour_slot());
    double sum = 0.0;
    for (std::size_t d = 0; d <= today && d < days.size(); ++d) sum += days[d][slot];
    return sum / static_cast<double>(today + 1);
}

double SocialStrengthState::seconds(const NodePair& pair, std::int64_t day, int slot) const {
    auto it = pairs_.find(pair);
    if (it == pairs_.end() || day < 0 || static_cast<std::size_t>(day) >= it->second.days.size()) return 0.0;
    return it->second.days[static_cast<std::size_t>(day)][static_cast<std::size_t>(slot)];
}

double SocialStrengthState::total_seconds(const NodePair& pair) const {
    auto it = pairs_.find(pair);
    return it == pairs_.end() ? 0.0 : it->second.total_s;
}

bool SocialStrengthState::has_contact(const NodePair& pair) const {
    auto it = pairs_.find(pair);
    return it != pairs_.end() && it->second.total_s > 0.0;
}

std::vector<NodePair> SocialStrengthState::pairs() const {
    std::vector<NodePair> out;
    for (const auto& [pair, h] : pairs_)
        if (h.total_s > 0.0) out.push_back(pair);
    return out;
}

double update_social_strength(SocialStrengthState& state, const NodePair& pair,
                              std::span<const ContactEvent> contacts, Tick now) {
    for (const auto& c : contacts) {
        if (c.pair != pair) throw ValidationError("update_social_strength: contact of another pair");
        state.add(c);
    }
    return state.strength(pair, now);
}

void ContactTracker::observe(const BtSighting& s, SocialStrengthState& strength) {
    const auto pair = canonical_pair(s.observer, s.subject);
    const auto t = s.t.ms;
    auto it = open_.find(pair);
    if (it != open_.end()) {
        auto& open = it->second;
        if (t < open.last) throw ValidationError("ContactTracker: sightings out of time order");
        if (t - open.last <= gap_ms_) {
            strength.credit(pair, open.last, coverage_end(t, dwell_ms_));
            open.last = t;
            return;
        }
        closed_[pair].push_back({pair, Tick{open.start}, Tick{open.last},
                                 static_cast<double>(open.last - open.start) / 1000.0 + dwell_ms_ / 1000.0});
        open = {t, t};
    } else {
        open_.emplace(pair, Open{t, t});
    }
    strength.credit(pair, t, coverage_end(t, dwell_ms_));
}

std::vector<ContactEvent> ContactTracker::contacts(const NodePair& pair) const {
    std::vector<ContactEvent> out;
    if (auto it = closed_.find(pair); it != closed_.end()) out = it->second;
    if (auto it = open_.find(pair); it != open_.end())
        out.push_back({pair, Tick{it->second.start}, Tick{it->second.last},
                       static_cast<double>(it->second.last - it->second.start) / 1000.0 + dwell_ms_ / 1000.0});
    return out;
}

double estimate_distance_raw(double rssi_dbm, const PathLossParams& params) {
    return std::pow(10.0, (params.p_ref_dbm - rssi_dbm) / (10.0 * params.pathloss_exp));
}

double ema_update(DistanceState& state, double raw_m, Tick now) {
    if (!state.initialized) {
        state.ema_m = raw_m;
        state.initialized = true;
    } else {
        state.ema_m = state.alpha * raw_m + (1.0 - state.alpha) * state.ema_m;
    }
    state.last_update = now;
    return state.ema_m;
}

Distance current_distance(const DistanceState& state, Tick now, std::int64_t staleness_ms) {
    if (!state.initialized || now.ms - state.last_update.ms > staleness_ms) return Distance::out_of_range();
    return Distance::meters(state.ema_m);
}

void DistanceTracker::observe(const BtSighting& s) {
    auto& state = states_[NodePair{s.observer, s.subject}];
    if (state.initialized && s.t.ms - state.last_update.ms > params_.staleness_ms) state.initialized = false;
    state.alpha = params_.alpha;
    ema_update(state, estimate_distance_raw(s.rssi_dbm, params_.path_loss), s.t);
}

Distance DistanceTracker::distance(const NodeId& observer, const NodeId& subject, Tick now) const {
    const auto* st = state(observer, subject);
    return st ? current_distance(*st, now, params_.staleness_ms) : Distance::out_of_range();
}

const DistanceState* DistanceTracker::state(const NodeId& observer, const NodeId& subject) const {
    auto it = states_.find(NodePair{observer, subject});
    return it == states_.end() ? nullptr : &it->second;
}

MotionResult classify_motion(std::span<const AccelSample> window, double threshold_ms2) {
    if (window.size() < kMinMotionWindowSamples)
        throw ValidationError("classify_motion: window needs at least 10 samples, got " +
                              std::to_string(window.size()));
    double mean = 0.0;
    for (const auto& s : window) mean += std::sqrt(s.ax * s.ax + s.ay * s.ay + s.az * s.az);
    mean /= static_cast<double>(window.size());
    double var = 0.0;
    for (const auto& s : window) {
        const double dev = std::sqrt(s.ax * s.ax + s.ay * s.ay + s.az * s.az) - mean;
        var += dev * dev;
    }
    const double feature = std::sqrt(var / static_cast<double>(window.size()));
    return {feature > threshold_ms2 ? Motion::Moving : Motion::Stationary, feature};
}

void MotionTracker::observe(const AccelSample& s) {
    auto& n = nodes_[s.node];
    const auto w = s.t.ms / params_.motion_window_ms;
    if (w != n.window) {
        flush(n);
        n.window = w;
    }
    n.buffer.push_back(s);
}

void MotionTracker::flush(NodeState& n) {
    if (n.buffer.size() >= kMinMotionWindowSamples) {
        if (classify_motion(n.buffer, params_.motion_threshold).label == Motion::Moving)
            ++n.moving;
        else
            ++n.stationary;
    }
    n.buffer.clear();
}

std::map<NodeId, Motion> MotionTracker::close_minute() {
    std::map<NodeId, Motion> out;
    for (auto& [id, n] : nodes_) {
        flush(n);
        const int total = n.moving + n.stationary;
        if (total > 0) n.last = 2 * n.moving >= total ? Motion::Moving : Motion::Stationary;
        n.moving = n.stationary = 0;
        out.emplace(id, n.last);
    }
    return out;
}

SoundClass sound_class_for_level(double level_db, const SoundThresholds& t) {
    if (level_db < t.quiet_below_db) return SoundClass::Quiet;
    if (level_db < t.normal_below_db) return SoundClass::Normal;
    if (level_db < t.alert_below_db) return SoundClass::Alert;
    return SoundClass::Noisy;
}

SoundResult classify_sound(std::span<const SoundSample> window, const SoundThresholds& thresholds) {
    if (window.empty()) throw ValidationError("classify_sound: empty window");
    double peak = 0.0;
    for (const auto& s : window) peak = std::max(peak, s.amplitude);
    const double level = 20.0 * std::log10(std::max(peak, kAmplitudeFloor));
    return {level, sound_class_for_level(level, thresholds)};
}

void SoundTracker::observe(const SoundSample& s) {
    auto& n = nodes_[s.node];
    const auto w = s.t.ms / params_.sound_window_ms;
    if (w != n.window) {
        flush(n);
        n.window = w;
    }
    n.buffer.push_back(s);
}

void SoundTracker::flush(NodeState& n) {
    if (!n.buffer.empty()) ++n.counts[static_cast<std::size_t>(classify_sound(n.buffer, params_.sound).v)];
    n.buffer.clear();
}

std::map<NodeId, SoundClass> SoundTracker::close_minute() {
    std::map<NodeId, SoundClass> out;
    for (auto& [id, n] : nodes_) {
        flush(n);
        const auto best = std::max_element(n.counts.begin(), n.counts.end());
        if (*best > 0) n.last = static_cast<SoundClass>(best - n.counts.begin());
        n.counts = {};
        out.emplace(id, n.last);
    }
    return out;
}

int node_degree(std::span<const BtSighting> sightings, const NodeId& node, Tick now, std::int64_t window_ms) {
    std::set<NodeId> subjects;
    for (const auto& s : sightings)
        if (s.observer == node && s.t.ms <= now.ms && s.t.ms >= now.ms - window_ms) subjects.insert(s.subject);
    return static_cast<int>(subjects.size());
}

void DegreeTracker::observe(const BtSighting& s) {
    auto& seen = last_seen_[s.observer][s.subject];
    seen = std::max(seen, s.t.ms);
}

int DegreeTracker::degree(const NodeId& node, Tick now, std::int64_t window_ms) const {
    auto it = last_seen_.find(node);
    if (it == last_seen_.end()) return 0;
    int n = 0;
    for (const auto& [subject, t] : it->second)
        if (t <= now.ms && t >= now.ms - window_ms) ++n;
    return n;
}

}  // namespace nsense::pipelines
