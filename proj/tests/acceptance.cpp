// Acceptance suite: every release criterion in one binary, one pass/fail
// line per criterion. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "flexsched/report.hpp"
#include "flexsched/rng.hpp"
#include "flexsched/serde.hpp"
#include "flexsched/simulation.hpp"
#include "test_util.hpp"

using namespace flexsched;

namespace {

int g_failed = 0;

void report(int criterion, const char* label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                label, detail.c_str());
    if (!pass) ++g_failed;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// ---------------------------------------------------------------------------

void criterion_1_scheduler_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20170102);
    int mismatches = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ProbabilisticFlexOffer pfo = testutil::random_pfo(rng);
        const MarketSeries market = testutil::random_market(rng, 0, 48);
        const double lambda = rng.next_uniform(0.01, 0.5);
        const UserFlexModel flex = testutil::flat_rate_model(lambda);
        SchedulerContext ctx;
        ctx.market = &market;
        ctx.flex = &flex;
        ctx.context = ContextKey{false, Season::winter};
        const ScheduleProposal p = schedule(pfo, ctx, "dev");
        const auto oracle = testutil::exhaustive_schedule(pfo, market, 0, lambda);
        const double gap = std::abs(p.expected_utility - oracle.expected_utility);
        worst = std::max(worst, gap);
        if (p.chosen_t != oracle.chosen_t || gap > 1e-9) ++mismatches;
    }
    const double secs = elapsed(t0);
    char detail[128];
    std::snprintf(detail, sizeof detail,
                  "1000 instances, %d mismatches, max |dE|=%.2e, %.2fs", mismatches,
                  worst, secs);
    report(1, "scheduler matches exhaustive maximization", mismatches == 0 && secs < 10.0,
           detail);
}

void criterion_2_survival_properties() {
    Rng rng(2);
    bool ok = true;
    std::string why = "1000 rates, properties + gradient check";
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const double lambda = rng.next_uniform(1e-3, 2.0);
        const UserFlexModel model = testutil::flat_rate_model(lambda);
        const ContextKey ctx{false, Season::winter};
        // Value 1 at zero delay.
        if (model.acceptance_probability(ctx, 0.0) != 1.0) {
            ok = false;
            why = "acceptance(0) != 1";
        }
        // Monotone non-increasing.
        const double d1 = rng.next_uniform(0.0, 50.0);
        const double d2 = d1 + rng.next_uniform(0.0, 30.0);
        if (model.acceptance_probability(ctx, d1) <
            model.acceptance_probability(ctx, d2)) {
            ok = false;
            why = "acceptance increased with delay";
        }
        // Tail limit: below epsilon past -ln(eps)/lambda.
        const double eps = 1e-6;
        const double horizon = -std::log(eps) / lambda;
        if (model.acceptance_probability(ctx, horizon * 1.01) >= eps) {
            ok = false;
            why = "tail above epsilon";
        }
        // Gradient against central finite differences (extended precision
        // for the quotient; zero-gradient points excluded by construction).
        const double l = rng.next_uniform(0.02, 0.8);
        const double x = rng.next_uniform(0.5, 4.0 / l);
        double y = rng.next_double();
        while (std::abs(y - std::exp(-l * x)) < 0.05) y = rng.next_double();
        const long double h = 1e-7L * static_cast<long double>(l);
        auto q = [&](long double v) {
            const long double r = static_cast<long double>(y) - std::exp(-v * x);
            return r * r;
        };
        const long double fd = (q(l + h) - q(l - h)) / (2.0L * h);
        const double analytic = survival_gradient(l, x, y);
        if (std::abs(static_cast<double>(fd) - analytic) > 1e-6 * std::abs(analytic)) {
            ok = false;
            why = "gradient mismatch vs finite differences";
        }
    }
    report(2, "survival model properties and gradient", ok, why);
}

void criterion_3_offline_fit() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(3);
    double err_true = 0.0, err_mle = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const double true_rate = rng.next_uniform(0.03, 0.15);
        std::vector<double> intervals;
        double mean = 0.0;
        for (int i = 0; i < 500; ++i) {
            intervals.push_back(rng.next_exponential(true_rate));
            mean += intervals.back();
        }
        mean /= 500.0;
        const double mle = 1.0 / mean;
        const double fitted =
            fit_survival_rate(intervals, 0.002, 20, 1000 + static_cast<std::uint64_t>(s));
        err_true += std::abs(fitted - true_rate) / true_rate;
        err_mle += std::abs(fitted - mle) / mle;
    }
    err_true /= seeds;
    err_mle /= seeds;
    const double secs = elapsed(t0);
    char detail[128];
    std::snprintf(detail, sizeof detail,
                  "mean rel err vs true %.3f (<=0.15), vs MLE %.3f (<=0.10), %.2fs",
                  err_true, err_mle, secs);
    report(3, "offline survival fit recovery",
           err_true <= 0.15 && err_mle <= 0.10 && secs < 5.0, detail);
}

void criterion_4_online_convergence() {
    // One strongly active device, conjunctive oracle, ten seeds; compare the
    // feedback-weighted learned rate to the simulated user's true rate.
    const double true_rate = 0.15;
    double total_err = 0.0;
    std::int64_t min_feedback = std::numeric_limits<std::int64_t>::max();
    for (int s = 0; s < 10; ++s) {
        SyntheticDeviceConfig cfg = regular_profile_device();
        cfg.weekday_activation.fill(0.95);
        cfg.true_lambda.fill(true_rate);
        const DeviceData data = device_data_from_config(
            cfg, derive_seed(400, static_cast<std::uint64_t>(s)), 1500, {2014, 1, 6});
        const MarketSeries market = generate_synthetic_market(
            days_from_civil({2014, 1, 6}) * 24, 1502,
            derive_seed(401, static_cast<std::uint64_t>(s)));
        PrequentialConfig run;
        run.seed = derive_seed(402, static_cast<std::uint64_t>(s));
        run.oracle_mode = OracleMode::both;
        run.online_mu0 = 0.08;
        const RunReport rep = run_prequential({data}, market, run);
        min_feedback = std::min(min_feedback, rep.n_feedback);
        total_err += std::abs(rep.mean_lambda - true_rate) / true_rate;
    }
    const double mean_err = total_err / 10.0;
    char detail[128];
    std::snprintf(detail, sizeof detail,
                  "mean |lambda-lambda*|/lambda* = %.3f (<=0.30), min feedbacks %lld",
                  mean_err, static_cast<long long>(min_feedback));
    report(4, "online learning converges to the true rate",
           mean_err <= 0.30 && min_feedback >= 200, detail);
}

// ---------------------------------------------------------------------------

double arm_mean(const ExperimentReport& experiment, const std::string& arm,
                double param, double (*metric)(const RunReport&)) {
    double sum = 0.0;
    int n = 0;
    for (const ExperimentRun& run : experiment.runs) {
        if (run.arm == arm && run.param == param) {
            sum += metric(run.report);
            ++n;
        }
    }
    return n > 0 ? sum / n : std::nan("");
}

double acceptance_of(const RunReport& r) { return r.acceptance_rate; }
double spot_pct_of(const RunReport& r) { return r.spot_savings_pct; }

void criteria_5_to_9(const ComparisonBundle& bundle, double bundle_secs,
                     const std::vector<double>& mu_grid,
                     const std::vector<int>& flex_grid) {
    // Criterion 5: adaptive beats uniform by 10 points, acceptance is
    // non-decreasing in the learning rate, uniform keeps the higher
    // accepted-only savings percentage.
    {
        const double uniform_acc =
            arm_mean(bundle.flexibility_models, "uniform", 0.0, acceptance_of);
        const double uniform_spot =
            arm_mean(bundle.flexibility_models, "uniform", 0.0, spot_pct_of);
        bool ok = bundle_secs < 300.0;
        std::string detail;
        double prev_acc = -1.0;
        for (double mu : mu_grid) {
            char arm[32];
            std::snprintf(arm, sizeof arm, "mu=%.2f", mu);
            const double acc = arm_mean(bundle.flexibility_models, arm, mu, acceptance_of);
            const double spot = arm_mean(bundle.flexibility_models, arm, mu, spot_pct_of);
            if (acc < uniform_acc + 0.10) ok = false;
            if (acc < prev_acc) ok = false;
            if (spot >= uniform_spot) ok = false;
            prev_acc = acc;
            char part[64];
            std::snprintf(part, sizeof part, " a(%.2f)=%.3f/s=%.1f%%", mu, acc, spot);
            detail += part;
        }
        char head[96];
        std::snprintf(head, sizeof head, "uniform a=%.3f/s=%.1f%%,%s, %.0fs",
                      uniform_acc, uniform_spot, detail.c_str(), bundle_secs);
        report(5, "adaptive vs uniform acceptance and savings trade-off", ok, head);
    }

    // Criterion 6: predicted-scenario acceptance rises on [0,4], peaks near
    // 4-6 hours, and the peak beats the 10-hour level.
    {
        std::map<int, double> acc;
        for (int f : flex_grid) {
            acc[f] = arm_mean(bundle.ideal_vs_predicted, "predicted",
                              static_cast<double>(f), acceptance_of);
        }
        bool rises = true;
        for (int f = 1; f <= 4; ++f) {
            if (acc.count(f) && acc.count(f - 1) && acc[f] < acc[f - 1]) rises = false;
        }
        if (acc[4] <= acc[0]) rises = false;
        int peak = flex_grid.front();
        for (int f : flex_grid) {
            if (acc[f] > acc[peak]) peak = f;
        }
        const bool peak_ok = peak >= 4 && peak <= 6;
        const bool beats_ten = acc[peak] > acc[10];
        char detail[160];
        std::snprintf(detail, sizeof detail,
                      "a(0)=%.3f a(2)=%.3f a(4)=%.3f a(6)=%.3f a(10)=%.3f peak@%d",
                      acc[0], acc[2], acc[4], acc[6], acc[10], peak);
        report(6, "predicted acceptance vs manual flexibility has the documented shape",
               rises && peak_ok && beats_ten, detail);
    }

    // Criterion 7: predicted savings are 30..100% of ideal at every
    // non-degenerate flexibility level (at zero flexibility neither scenario
    // can shift anything and the ratio is undefined).
    {
        bool ok = true;
        double lo_ratio = 1e9, hi_ratio = -1e9;
        for (int f : flex_grid) {
            if (f == 0) continue;
            const double ideal = arm_mean(bundle.ideal_vs_predicted, "ideal",
                                          static_cast<double>(f), spot_pct_of);
            const double predicted = arm_mean(bundle.ideal_vs_predicted, "predicted",
                                              static_cast<double>(f), spot_pct_of);
            if (!(ideal > 0.0)) {
                ok = false;
                continue;
            }
            const double ratio = predicted / ideal;
            lo_ratio = std::min(lo_ratio, ratio);
            hi_ratio = std::max(hi_ratio, ratio);
            if (ratio < 0.30 || ratio > 1.00) ok = false;
        }
        char detail[96];
        std::snprintf(detail, sizeof detail, "ratio range [%.2f, %.2f] within [0.30, 1.00]",
                      lo_ratio, hi_ratio);
        report(7, "predicted savings stay within the ideal-scenario band", ok, detail);
    }

    // Criterion 8: probabilistic offers match or beat the collapsed standard
    // offers under forecast noise.
    {
        double std_acc = 0.0, prob_acc = 0.0;
        int n_std = 0, n_prob = 0;
        for (const ExperimentRun& run : bundle.standard_vs_probabilistic.runs) {
            if (run.arm == "standard") {
                std_acc += run.report.acceptance_rate;
                ++n_std;
            } else {
                prob_acc += run.report.acceptance_rate;
                ++n_prob;
            }
        }
        std_acc /= std::max(n_std, 1);
        prob_acc /= std::max(n_prob, 1);
        char detail[96];
        std::snprintf(detail, sizeof detail, "probabilistic %.3f vs standard %.3f",
                      prob_acc, std_acc);
        report(8, "probabilistic offers hold their acceptance edge under noise",
               prob_acc >= std_acc, detail);
    }

    // Criterion 9: two-level prediction strictly beats the one-level
    // baseline, with absolute floors on the regular profile.
    {
        double two_acc = 0.0, two_rmse = 0.0, one_acc = 0.0, one_rmse = 0.0;
        int n_two = 0, n_one = 0;
        for (const PredictionComparisonRow& row : bundle.prediction_levels) {
            if (row.scope != "regular") continue;
            if (row.model == "two_level") {
                two_acc += row.day_accuracy;
                two_rmse += row.hour_rmse;
                ++n_two;
            } else {
                one_acc += row.day_accuracy;
                one_rmse += row.hour_rmse;
                ++n_one;
            }
        }
        two_acc /= std::max(n_two, 1);
        two_rmse /= std::max(n_two, 1);
        one_acc /= std::max(n_one, 1);
        one_rmse /= std::max(n_one, 1);
        const bool ok = two_acc > one_acc && two_rmse < one_rmse && two_acc >= 0.70 &&
                        two_rmse <= 4.5;
        char detail[128];
        std::snprintf(detail, sizeof detail,
                      "two-level acc %.3f rmse %.2f vs one-level acc %.3f rmse %.2f",
                      two_acc, two_rmse, one_acc, one_rmse);
        report(9, "two-level prediction beats the one-level baseline", ok, detail);
    }
}

void criterion_10_determinism() {
    const auto suite = builtin_synthetic_suite();
    std::vector<DeviceData> devices;
    for (std::size_t i = 0; i < 4; ++i) {
        devices.push_back(device_data_from_config(
            suite[i * 3], derive_seed(500, i), 150, {2017, 1, 2}));
    }
    const MarketSeries market = generate_synthetic_market(
        days_from_civil({2017, 1, 2}) * 24, 152, 77);
    PrequentialConfig run;
    run.seed = 42;

    const auto dir = std::filesystem::temp_directory_path() / "flexsched_acceptance";
    std::filesystem::create_directories(dir);
    auto emit = [&](const char* name, int threads) {
        run.scheduler_threads = threads;
        const RunReport rep = run_prequential(devices, market, run);
        const std::string stem = (dir / name).string();
        write_report(rep, stem);
        return stem;
    };
    const std::string a = emit("run_a", 0);
    const std::string b = emit("run_b", 0);
    const std::string c = emit("run_c", 4);

    const bool rerun_ok =
        slurp(a + ".json") == slurp(b + ".json") && slurp(a + ".csv") == slurp(b + ".csv");
    const bool thread_ok =
        slurp(a + ".json") == slurp(c + ".json") && slurp(a + ".csv") == slurp(c + ".csv");

    // The experiment harness must also be execution-order independent.
    ExperimentConfig cfg;
    cfg.devices = {suite[0], suite[5]};
    cfg.n_days = 90;
    cfg.n_shuffles = 2;
    cfg.mu_grid = {0.08};
    cfg.flexibility_grid = {0, 6};
    cfg.threads = 1;
    const ComparisonBundle serial = run_comparisons(cfg);
    cfg.threads = 4;
    const ComparisonBundle parallel = run_comparisons(cfg);
    bool experiments_ok =
        serial.flexibility_models.runs.size() == parallel.flexibility_models.runs.size();
    if (experiments_ok) {
        for (std::size_t i = 0; i < serial.flexibility_models.runs.size(); ++i) {
            experiments_ok =
                experiments_ok &&
                run_report_to_json(serial.flexibility_models.runs[i].report) ==
                    run_report_to_json(parallel.flexibility_models.runs[i].report);
        }
    }

    char detail[96];
    std::snprintf(detail, sizeof detail, "rerun %s, 1-vs-4 threads %s, experiments %s",
                  rerun_ok ? "ok" : "DIFFERS", thread_ok ? "ok" : "DIFFERS",
                  experiments_ok ? "ok" : "DIFFERS");
    report(10, "seeded runs emit byte-identical reports", rerun_ok && thread_ok && experiments_ok,
           detail);
}

}  // namespace

int main() {
    std::printf("flexsched acceptance suite\n");
    criterion_1_scheduler_oracle();
    criterion_2_survival_properties();
    criterion_3_offline_fit();
    criterion_4_online_convergence();

    ExperimentConfig config;  // defaults: full suite, one year, ten shuffles
    const auto t0 = std::chrono::steady_clock::now();
    const ComparisonBundle bundle = run_comparisons(config);
    const double bundle_secs = elapsed(t0);
    criteria_5_to_9(bundle, bundle_secs, config.mu_grid, config.flexibility_grid);

    criterion_10_determinism();

    if (g_failed == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failed);
    return 1;
}
