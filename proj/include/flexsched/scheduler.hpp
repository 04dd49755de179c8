#ifndef FLEXSCHED_SCHEDULER_HPP
#define FLEXSCHED_SCHEDULER_HPP

#include <string>
#include <vector>

#include "flexsched/flexoffer.hpp"
#include "flexsched/market.hpp"
#include "flexsched/userflex.hpp"

namespace flexsched {

struct IntervalContribution {
    FlexInterval interval;
    Money delta_spot = 0.0;
    Money delta_reg = 0.0;
    double acceptance_prob = 0.0;
    Money contribution = 0.0;  // (dS + dR) * acceptance * interval probability
};

struct CandidateEvaluation {
    int t = 0;  // horizon hour
    Money expected_utility = 0.0;
    std::vector<IntervalContribution> per_interval;
};

struct ScheduleProposal {
    std::string device_id;
    int chosen_t = 0;         // horizon hour attaining the maximum utility
    int reference_t_es = 0;   // modal earliest start
    Money expected_utility = 0.0;
    SavingsBreakdown savings;  // chosen_t vs reference_t_es
    std::vector<CandidateEvaluation> candidates;
};

struct SchedulerContext {
    const MarketSeries* market = nullptr;
    const UserFlexModel* flex = nullptr;
    ContextKey context;
    // Horizon hour 0 maps to this series-global market hour.
    std::int64_t day_offset_hours = 0;
    MarketOptions market_options;
    // 0 = serial; > 1 enables the OpenMP candidate kernel. Results are
    // identical either way: each candidate is evaluated independently and
    // the argmax reduction is always serial.
    int threads = 0;
};

// Expected utility of starting at t under one realized flexibility window:
// (spot + regulation savings vs the window's t_es) * acceptance probability
// of the induced delay. t must lie within [interval.t_es, interval.t_ls].
Money expected_utility(int t, const FlexInterval& interval,
                       const std::vector<ProfileSlice>& profile,
                       const SchedulerContext& ctx);

// Probability-weighted utility across all enumerated windows; windows that
// do not contain t contribute 0.
Money objective(int t, const ProbabilisticFlexOffer& pfo, const SchedulerContext& ctx);

// Full candidate table over the union of window hours. The parallel and
// serial paths produce bit-identical tables.
std::vector<CandidateEvaluation> evaluate_candidates(const ProbabilisticFlexOffer& pfo,
                                                     const SchedulerContext& ctx);

// argmax_t of the expected utility, earliest hour on ties.
ScheduleProposal schedule(const ProbabilisticFlexOffer& pfo, const SchedulerContext& ctx,
                          const std::string& device_id);

}  // namespace flexsched

#endif
