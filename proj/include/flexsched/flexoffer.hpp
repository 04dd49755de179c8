#ifndef FLEXSCHED_FLEXOFFER_HPP
#define FLEXSCHED_FLEXOFFER_HPP

#include <vector>

#include "flexsched/forecast.hpp"
#include "flexsched/load_data.hpp"

namespace flexsched {

// Energy bounds of one operating hour. Wet devices allow no amount deferral,
// so e_min == e_max throughout; the range is kept structurally.
struct ProfileSlice {
    double e_min = 0.0;
    double e_max = 0.0;
};

// Shiftable demand: the activate action may start anywhere in [t_es, t_ls].
struct FlexOffer {
    int t_es = 0;
    int t_ls = 0;
    std::vector<ProfileSlice> profile;

    int duration() const { return static_cast<int>(profile.size()); }
    int t_le() const { return t_ls + duration(); }
};

// Flexibility under uncertainty: discrete distributions over the earliest
// start and (conditionally) the latest end time.
struct ProbabilisticFlexOffer {
    ForecastDistribution t_es_dist;
    std::vector<std::pair<int, ForecastDistribution>> t_le_conditional;
    std::vector<ProfileSlice> profile;

    int duration() const { return static_cast<int>(profile.size()); }
    const ForecastDistribution& conditional_at(int t_es) const;
};

// One realized flexibility window with its joint probability.
struct FlexInterval {
    int t_es = 0;
    int t_ls = 0;  // = t_le - |profile|
    double probability = 0.0;
};

std::vector<ProfileSlice> profile_from_signature(const DeviceSignature& sig);

FlexOffer make_flexoffer(int t_es, int t_le, const DeviceSignature& sig);

ProbabilisticFlexOffer make_probabilistic_flexoffer(const ActivityForecast& forecast,
                                                    const DeviceSignature& sig);

// All (t_es, t_le) pairs that admit the operation, weighted by the joint
// probability P(t_le | t_es) * P(t_es). Infeasible pairs are dropped without
// renormalization; output sorted by (t_es, t_ls).
std::vector<FlexInterval> enumerate_intervals(const ProbabilisticFlexOffer& pfo);

// Baseline reduction: modal t_es, modal conditional t_le (earlier hour on
// ties), then a standard flex-offer over that single window.
FlexOffer collapse_to_standard(const ProbabilisticFlexOffer& pfo);

}  // namespace flexsched

#endif
