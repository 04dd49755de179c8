// Benchmark comparing the serial reference paths against the OpenMP kernels:
// candidate evaluation in the scheduler and the multi-run experiment loop.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flexsched/rng.hpp"
#include "flexsched/scheduler.hpp"
#include "flexsched/simulation.hpp"

using namespace flexsched;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A deliberately dense offer: wide supports make the candidate kernel heavy.
ProbabilisticFlexOffer dense_offer() {
    ProbabilisticFlexOffer pfo;
    DeviceSignature sig;
    sig.per_hour_demand = {1.1, 0.8, 0.4};
    pfo.profile = profile_from_signature(sig);
    const int n_es = 16;
    for (int t = 0; t < n_es; ++t) {
        pfo.t_es_dist.support.push_back(t);
        pfo.t_es_dist.pmf.push_back(1.0 / n_es);
        ForecastDistribution cond;
        const int lo = t + 3, hi = 47;
        for (int u = lo; u <= hi; ++u) cond.support.push_back(u);
        cond.pmf.assign(cond.support.size(), 1.0 / static_cast<double>(cond.support.size()));
        pfo.t_le_conditional.emplace_back(t, std::move(cond));
    }
    return pfo;
}

double bench_scheduler(int threads, int repetitions, const MarketSeries& market,
                       const UserFlexModel& flex, Money& checksum) {
    const ProbabilisticFlexOffer pfo = dense_offer();
    SchedulerContext ctx;
    ctx.market = &market;
    ctx.flex = &flex;
    ctx.context = ContextKey{false, Season::winter};
    ctx.day_offset_hours = market.start_hour;
    ctx.threads = threads;

    checksum = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repetitions; ++r) {
        const ScheduleProposal p = schedule(pfo, ctx, "bench");
        checksum += p.expected_utility + p.chosen_t;
    }
    return seconds_since(t0);
}

double bench_experiments(int threads, double& checksum) {
    ExperimentConfig config;
    config.n_days = 180;
    config.n_shuffles = 4;
    config.threads = threads;
    config.flexibility_grid = {0, 4, 8, 12};
    const auto t0 = std::chrono::steady_clock::now();
    const ComparisonBundle bundle = run_comparisons(config);
    checksum = 0.0;
    for (const ExperimentRun& run : bundle.flexibility_models.runs) {
        checksum += run.report.acceptance_rate;
    }
    return seconds_since(t0);
}

}  // namespace

int main() {
    int max_threads = 1;
#ifdef _OPENMP
    max_threads = omp_get_max_threads();
#endif
    std::printf("flexsched benchmark (max threads: %d)\n\n", max_threads);

    const MarketSeries market = generate_synthetic_market(0, 3, 99);
    UserFlexModel flex(0.08);

    Money serial_sum = 0.0, parallel_sum = 0.0;
    const int reps = 2000;
    const double t_serial = bench_scheduler(0, reps, market, flex, serial_sum);
    const double t_parallel = bench_scheduler(max_threads, reps, market, flex, parallel_sum);
    std::printf("scheduler candidate kernel (%d dense schedules)\n", reps);
    std::printf("  serial:    %8.3f s\n", t_serial);
    std::printf("  %2d threads: %7.3f s  (speedup %.2fx)\n", max_threads,
                t_parallel, t_serial / t_parallel);
    std::printf("  results identical: %s\n\n",
                serial_sum == parallel_sum ? "yes" : "NO - BUG");

    double serial_acc = 0.0, parallel_acc = 0.0;
    const double e_serial = bench_experiments(1, serial_acc);
    const double e_parallel = bench_experiments(max_threads, parallel_acc);
    std::printf("experiment suite (reduced grid)\n");
    std::printf("  serial:    %8.3f s\n", e_serial);
    std::printf("  %2d threads: %7.3f s  (speedup %.2fx)\n", max_threads,
                e_parallel, e_serial / e_parallel);
    std::printf("  results identical: %s\n",
                serial_acc == parallel_acc ? "yes" : "NO - BUG");
    return 0;
}
