#pragma once

// Per-minute fusion of pipeline outputs into the two utility functions and the
// qualitative nearness label.
//
//   propinquity        p  = s / ((d + 1) * m)
//   social interaction si = log10(s) * N(v; mu, sigma^2) / (log10(d + 10) * m)
//
// where N is the normal density with variance sigma2. Both are 0 when the
// distance is OUT_OF_RANGE; p is 0 for s = 0 and si is 0 for s < s_floor.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "nsense/domain.hpp"

namespace nsense::fusion {

struct FusionParams {
    double sigma2 = 0.75;  // variance of the sound-class Gaussian
    double mu = 1.0;       // sound class at which interaction peaks
    double s_floor = 1.0;  // seconds; below it si is 0

    void validate() const;  // throws ValidationError
};

double propinquity(double s, Distance d, Motion m);
double social_interaction(double s, SoundClass v, Distance d, Motion m, const FusionParams& params = {});

inline constexpr std::size_t kMinSessionRecords = 10;

/// Empirical distribution of p and si over the records produced so far.
class SessionStats {
public:
    void add(double p, double si);
    void add_all(std::span<const double> p, std::span<const double> si);

    std::size_t size() const noexcept { return p_.size(); }

    /// Tercile level 0/1/2 of x: floor(3 * (#values < x) / N), capped at 2.
    int level_p(double x) const { return level(p_, x); }
    int level_si(double x) const { return level(si_, x); }

private:
    static int level(const std::vector<double>& sorted, double x);
    static void merge_into(std::vector<double>& sorted, std::vector<double> values);

    std::vector<double> p_;   // sorted
    std::vector<double> si_;  // sorted
};

struct NearnessResult {
    Nearness label = Nearness::Low;
    bool provisional = false;  // session had fewer than 10 records
};

/// Combines the tercile levels of p and si: floor((level(p) + level(si)) / 2).
NearnessResult nearness_label(double p, double si, const SessionStats& session);
Nearness combine_levels(int level_p, int level_si);

/// Pipeline outputs at one minute boundary.
struct NodeSnapshot {
    int degree = 0;
    Motion motion = Motion::Stationary;
    SoundClass sound = SoundClass::Quiet;
};

struct PairSnapshot {
    NodePair pair;          // canonical
    double strength = 0.0;  // s(i,j) in seconds
    Distance first_to_second = Distance::out_of_range();  // as measured by pair.first
    Distance second_to_first = Distance::out_of_range();
};

struct PipelineSnapshot {
    std::map<NodeId, NodeSnapshot> nodes;
    std::vector<PairSnapshot> pairs;  // pairs with contact history
};

/// Emits two records per snapshot pair, one from each node's perspective
/// (the owner's motion, sound and measured distance), sorted by (i, j).
/// The records join `session` before their nearness labels are computed.
std::vector<MinuteRecord> fuse_minute(const PipelineSnapshot& snapshot, std::int64_t minute,
                                      const FusionParams& params, SessionStats& session);

}  // namespace nsense::fusion
