#include "nsense/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nsense::fusion {

void FusionParams::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be > 0");
    if (!(mu >= 0.0 && mu <= 3.0)) throw ValidationError("mu must lie within the sound class range 0..3");
    if (!(s_floor > 0.0) || !std::isfinite(s_floor)) throw ValidationError("s_floor must be > 0");
}

double propinquity(double s, Distance d, Motion m) {
    if (s <= 0.0 || !d.in_range()) return 0.0;
    return s / ((d.value_m() + 1.0) * static_cast<double>(static_cast<int>(m)));
}

double social_interaction(double s, SoundClass v, Distance d, Motion m, const FusionParams& params) {
    if (s < params.s_floor || !d.in_range()) return 0.0;
    const double sigma = std::sqrt(params.sigma2);
    const double dv = static_cast<double>(static_cast<int>(v)) - params.mu;
    const double gauss = std::exp(-(dv * dv) / (2.0 * params.sigma2)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    const double numerator = std::log10(std::max(s, params.s_floor)) * gauss;
    return numerator / (std::log10(d.value_m() + 10.0) * static_cast<double>(static_cast<int>(m)));
}

void SessionStats::merge_into(std::vector<double>& sorted, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto mid = static_cast<std::ptrdiff_t>(sorted.size());
    sorted.insert(sorted.end(), values.begin(), values.end());
    std::inplace_merge(sorted.begin(), sorted.begin() + mid, sorted.end());
}

void SessionStats::add(double p, double si) {
    p_.insert(std::upper_bound(p_.begin(), p_.end(), p), p);
    si_.insert(std::upper_bound(si_.begin(), si_.end(), si), si);
}

void SessionStats::add_all(std::span<const double> p, std::span<const double> si) {
    merge_into(p_, {p.begin(), p.end()});
    merge_into(si_, {si.begin(), si.end()});
}

int SessionStats::level(const std::vector<double>& sorted, double x) {
    if (sorted.empty()) return 0;
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    return static_cast<int>(std::min<std::size_t>(2, 3 * below / sorted.size()));
}

Nearness combine_levels(int level_p, int level_si) { return static_cast<Nearness>((level_p + level_si) / 2); }

NearnessResult nearness_label(double p, double si, const SessionStats& session) {
    if (session.size() < kMinSessionRecords) return {Nearness::Low, true};
    return {combine_levels(session.level_p(p), session.level_si(si)), false};
}

std::vector<MinuteRecord> fuse_minute(const PipelineSnapshot& snapshot, std::int64_t minute,
                                      const FusionParams& params, SessionStats& session) {
    std::vector<MinuteRecord> out;
    out.reserve(snapshot.pairs.size() * 2);
    auto node = [&snapshot](const NodeId& id) {
        auto it = snapshot.nodes.find(id);
        return it == snapshot.nodes.end() ? NodeSnapshot{} : it->second;
    };
    auto emit = [&](const NodeId& i, const NodeId& j, double s, Distance d) {
        const auto owner = node(i);
        MinuteRecord r;
        r.minute = minute;
        r.i = i;
        r.j = j;
        r.n_i = owner.degree;
        r.m_i = owner.motion;
        r.v_i = owner.sound;
        r.d_ij = d;
        r.s_ij = s;
        r.p_ij = propinquity(s, d, owner.motion);
        r.si_ij = social_interaction(s, owner.sound, d, owner.motion, params);
        out.push_back(std::move(r));
    };
    for (const auto& pair : snapshot.pairs) {
        emit(pair.pair.first, pair.pair.second, pair.strength, pair.first_to_second);
        emit(pair.pair.second, pair.pair.first, pair.strength, pair.second_to_first);
    }
    std::sort(out.begin(), out.end(), [](const MinuteRecord& a, const MinuteRecord& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });

    std::vector<double> ps, sis;
    for (const auto& r : out) {
        ps.push_back(r.p_ij);
        sis.push_back(r.si_ij);
    }
    session.add_all(ps, sis);
    for (auto& r : out) r.nearness = nearness_label(r.p_ij, r.si_ij, session).label;
    return out;
}

}  // namespace nsense::fusion
