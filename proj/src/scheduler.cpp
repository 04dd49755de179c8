#include "flexsched/scheduler.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flexsched {

namespace {

void check_context(const SchedulerContext& ctx) {
    if (ctx.market == nullptr || ctx.flex == nullptr) {
        raise(ErrorCode::internal_error, "scheduler context is missing market or flex model");
    }
}

IntervalContribution evaluate_interval(int t, const FlexInterval& interval,
                                       const std::vector<ProfileSlice>& profile,
                                       const SchedulerContext& ctx) {
    IntervalContribution c;
    c.interval = interval;
    const std::int64_t global_t = ctx.day_offset_hours + t;
    const std::int64_t global_es = ctx.day_offset_hours + interval.t_es;
    c.delta_spot = spot_savings(profile, global_es, global_t, *ctx.market);
    c.delta_reg = reg_savings(profile, global_es, global_t, *ctx.market, ctx.market_options);
    c.acceptance_prob = ctx.flex->acceptance_probability(
        ctx.context, static_cast<double>(t - interval.t_es));
    c.contribution =
        (c.delta_spot + c.delta_reg) * c.acceptance_prob * interval.probability;
    return c;
}

CandidateEvaluation evaluate_one(int t, const std::vector<FlexInterval>& intervals,
                                 const std::vector<ProfileSlice>& profile,
                                 const SchedulerContext& ctx) {
    CandidateEvaluation eval;
    eval.t = t;
    for (const FlexInterval& interval : intervals) {
        if (t < interval.t_es || t > interval.t_ls) continue;
        eval.per_interval.push_back(evaluate_interval(t, interval, profile, ctx));
        eval.expected_utility += eval.per_interval.back().contribution;
    }
    return eval;
}

}  // namespace

Money expected_utility(int t, const FlexInterval& interval,
                       const std::vector<ProfileSlice>& profile,
                       const SchedulerContext& ctx) {
    check_context(ctx);
    if (t < interval.t_es || t > interval.t_ls) {
        raise(ErrorCode::domain_error,
              "candidate hour " + std::to_string(t) + " outside window [" +
                  std::to_string(interval.t_es) + "," + std::to_string(interval.t_ls) + "]");
    }
    const std::int64_t global_t = ctx.day_offset_hours + t;
    const std::int64_t global_es = ctx.day_offset_hours + interval.t_es;
    const Money ds = spot_savings(profile, global_es, global_t, *ctx.market);
    const Money dr = reg_savings(profile, global_es, global_t, *ctx.market, ctx.market_options);
    return (ds + dr) * ctx.flex->acceptance_probability(
                           ctx.context, static_cast<double>(t - interval.t_es));
}

Money objective(int t, const ProbabilisticFlexOffer& pfo, const SchedulerContext& ctx) {
    check_context(ctx);
    const std::vector<FlexInterval> intervals = enumerate_intervals(pfo);
    if (intervals.empty()) {
        raise(ErrorCode::no_feasible_schedule, "no feasible flexibility interval");
    }
    Money total = 0.0;
    for (const FlexInterval& interval : intervals) {
        if (t < interval.t_es || t > interval.t_ls) continue;
        total += expected_utility(t, interval, pfo.profile, ctx) * interval.probability;
    }
    return total;
}

std::vector<CandidateEvaluation> evaluate_candidates(const ProbabilisticFlexOffer& pfo,
                                                     const SchedulerContext& ctx) {
    check_context(ctx);
    const std::vector<FlexInterval> intervals = enumerate_intervals(pfo);
    if (intervals.empty()) {
        raise(ErrorCode::no_feasible_schedule, "no feasible flexibility interval");
    }

    // Candidate grid: union of the integer hours of every window.
    std::vector<int> candidates;
    for (const FlexInterval& interval : intervals) {
        for (int t = interval.t_es; t <= interval.t_ls; ++t) {
            candidates.push_back(t);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<CandidateEvaluation> evals(candidates.size());
    const auto n = static_cast<std::int64_t>(candidates.size());
#ifdef _OPENMP
    if (ctx.threads > 1) {
        // Each slot is written by exactly one thread; per-candidate sums run
        // in the fixed interval order, so the table matches the serial path.
#pragma omp parallel for schedule(static) num_threads(ctx.threads)
        for (std::int64_t i = 0; i < n; ++i) {
            evals[static_cast<std::size_t>(i)] =
                evaluate_one(candidates[static_cast<std::size_t>(i)], intervals,
                             pfo.profile, ctx);
        }
        return evals;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        evals[static_cast<std::size_t>(i)] =
            evaluate_one(candidates[static_cast<std::size_t>(i)], intervals,
                         pfo.profile, ctx);
    }
    return evals;
}

ScheduleProposal schedule(const ProbabilisticFlexOffer& pfo, const SchedulerContext& ctx,
                          const std::string& device_id) {
    ScheduleProposal proposal;
    proposal.device_id = device_id;
    proposal.candidates = evaluate_candidates(pfo, ctx);

    // Serial argmax with earliest-hour tie-break (candidates are sorted).
    std::size_t best = 0;
    for (std::size_t i = 1; i < proposal.candidates.size(); ++i) {
        if (proposal.candidates[i].expected_utility >
            proposal.candidates[best].expected_utility) {
            best = i;
        }
    }
    proposal.chosen_t = proposal.candidates[best].t;
    proposal.expected_utility = proposal.candidates[best].expected_utility;
    proposal.reference_t_es = pfo.t_es_dist.mode();

    const std::int64_t global_ref = ctx.day_offset_hours + proposal.reference_t_es;
    const std::int64_t global_t = ctx.day_offset_hours + proposal.chosen_t;
    proposal.savings.delta_spot = spot_savings(pfo.profile, global_ref, global_t, *ctx.market);
    proposal.savings.delta_reg =
        reg_savings(pfo.profile, global_ref, global_t, *ctx.market, ctx.market_options);
    return proposal;
}

}  // namespace flexsched
