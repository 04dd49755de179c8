#ifndef FLEXSCHED_SIMULATION_HPP
#define FLEXSCHED_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flexsched/forecast.hpp"
#include "flexsched/market.hpp"
#include "flexsched/scheduler.hpp"
#include "flexsched/userflex.hpp"

namespace flexsched {

// ---------------------------------------------------------------------------
// Synthetic household devices.

struct MixtureComponent {
    double weight = 1.0;
    double mean_hour = 19.0;  // over [0,23]
    double std_hours = 1.5;
};

struct SyntheticDeviceConfig {
    std::string category;
    std::string device_id;
    std::array<double, 7> weekday_activation{};  // Monday..Sunday
    std::vector<MixtureComponent> ready_hour_mixture;  // at most 3 components
    std::array<double, ContextKey::kBucketCount> true_lambda{};  // 1/hours
    DeviceSignature signature;
    double jitter_minus = 0.0;  // P(duration - 1)
    double jitter_plus = 0.0;   // P(duration + 1)
};

// The 13 built-in household categories, two wet devices each.
std::vector<SyntheticDeviceConfig> builtin_synthetic_suite();
// The designated regular-behavior profile used by the prediction benchmarks.
SyntheticDeviceConfig regular_profile_device();

struct SyntheticData {
    LoadSeries load;
    EventSeries events;
};

// One activation attempt per day with the weekday's probability; ready hour
// drawn from the truncated-normal mixture, duration jittered around the
// signature length. Deterministic per seed; overlapping draws are retried a
// few times, then the day is skipped.
SyntheticData generate_synthetic(const SyntheticDeviceConfig& config,
                                 std::uint64_t seed, int n_days,
                                 const CivilDate& start_date);

struct SyntheticMarketParams {
    double base_price = 0.25;
    double noise_std = 0.015;
    double up_spread = 0.10;
    double down_spread = 0.10;
    double p_up = 0.3;
    double p_down = 0.3;
    double volume_scale = 3.0;  // kWh, exponential magnitude
};

// Hourly spot prices with a residential day shape (evening peak, cheap
// night), regulation spreads and a seeded up/down/balanced volume regime.
MarketSeries generate_synthetic_market(std::int64_t start_hour, int n_days,
                                       std::uint64_t seed,
                                       const SyntheticMarketParams& params = {});

// ---------------------------------------------------------------------------
// Simulated user.

enum class OracleMode { deadline, stochastic, both };

const char* oracle_mode_name(OracleMode mode);
OracleMode oracle_mode_from_name(const std::string& name);

struct OracleUser {
    OracleMode mode = OracleMode::both;
    std::array<double, ContextKey::kBucketCount> true_lambda{};
};

struct OracleDecision {
    bool accepted = false;
    double manual_delay = 0.0;  // valid when rejected
    bool feasible = true;       // false when the proposal predates the ready action
};

// Deadline mode accepts when the operation completes before the next actual
// ready action; stochastic mode accepts with the true survival probability
// of the delay; `both` requires both. Rejections draw the manual activation
// delay uniformly from [0, min(delay-1, slack)], deadline violations use 0.
OracleDecision simulate_user_decision(const OracleUser& oracle,
                                      std::int64_t chosen_hour,
                                      std::int64_t ready_hour,
                                      std::optional<std::int64_t> next_ready_hour,
                                      int operation_hours, const ContextKey& context,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Prequential evaluation.

struct DeviceData {
    std::string device_id;
    EventSeries events;
    DeviceSignature signature;  // as configured or pre-extracted; the pipeline
                                // re-extracts its own from the training span
    std::array<double, ContextKey::kBucketCount> true_lambda{};
    CivilDate start_date{2017, 1, 2};
    int n_days = 0;
};

DeviceData device_data_from_config(const SyntheticDeviceConfig& config,
                                   std::uint64_t seed, int n_days,
                                   const CivilDate& start_date);

enum class OfferKind {
    probabilistic,  // full two-level forecast distributions
    standard,       // forecast collapsed to the modal window
    manual,         // point start time plus a fixed manual flexibility
};

enum class ResetPolicy { none, monthly, seasonal };

struct PrequentialConfig {
    double split = 0.8;  // chronological training fraction
    OracleMode oracle_mode = OracleMode::both;
    bool adaptive_flex = true;  // false runs the uniform acceptance baseline
    double online_mu0 = 0.08;
    OfflineFitConfig offline_fit;
    ForecasterConfig forecaster;
    ResetPolicy reset = ResetPolicy::seasonal;
    MarketOptions market_options;
    OfferKind offer_kind = OfferKind::probabilistic;
    int manual_flexibility = 0;  // hours, offer_kind == manual
    bool ideal_start = false;    // manual offers anchored at the true ready hour
    int scheduler_threads = 0;
    std::uint64_t seed = 42;
};

struct ProposalRecord {
    std::string device_id;
    CivilDate date;
    int reference_t_es = 0;  // horizon hour
    int chosen_t = 0;
    double delay = 0.0;  // vs the true ready action; negative = infeasible
    Money delta_spot = 0.0;  // realized, vs the true ready hour
    Money delta_reg = 0.0;
    double acceptance_prob = 0.0;  // model probability at the proposal
    bool accepted = false;
};

struct RunReport {
    double acceptance_rate = 0.0;
    double spot_savings_pct = 0.0;  // accepted-only, % of unshifted spot cost
    double reg_savings_pct = 0.0;   // accepted-only, % of unshifted |reg cost|
    double day_accuracy = 0.0;
    double hour_rmse = 0.0;
    std::int64_t n_proposals = 0;
    std::int64_t n_accepted = 0;
    std::int64_t n_rejected = 0;
    std::int64_t n_test_days = 0;
    std::int64_t n_feedback = 0;  // flex-model updates
    Money total_spot_savings = 0.0;
    Money total_reg_savings = 0.0;
    Money baseline_spot_cost = 0.0;
    Money baseline_reg_cost = 0.0;  // sum of |unshifted regulation cost|
    double mean_lambda = 0.0;       // feedback-weighted across devices
    std::vector<std::uint64_t> seeds;
    std::string config_digest;
    std::vector<ProposalRecord> proposals;
};

// Per-device forecast trace: predictions depend only on the load data, so
// experiment arms that share a dataset replay the same trace.
struct DayTrace {
    CivilDate date;
    std::int64_t day_start_hour = 0;
    bool actual_active = false;
    int ready_hour = 0;  // 0..23 when active
    std::int64_t ready_global = 0;
    std::optional<std::int64_t> next_ready_global;
    bool predicted_active = false;
    double es_prediction = 0.0;  // clamped [0,47]
    std::optional<ActivityForecast> forecast;
};

struct DeviceTrace {
    DeviceData data;
    DeviceSignature signature;     // extracted from the training span
    EventSeries training_events;   // for the offline user-flexibility fit
    std::vector<DayTrace> test_days;
};

DeviceTrace build_device_trace(const DeviceData& data, double split,
                               const ForecasterConfig& forecaster_config);

RunReport replay_run(const std::vector<DeviceTrace>& traces,
                     const MarketSeries& market, const PrequentialConfig& config);

// 80/20 chronological split, then test-then-train over the test days:
// forecast, build the offer, schedule, oracle decision, online updates.
RunReport run_prequential(const std::vector<DeviceData>& devices,
                          const MarketSeries& market, const PrequentialConfig& config);

// ---------------------------------------------------------------------------
// The comparative experiments.

struct ExperimentConfig {
    std::vector<SyntheticDeviceConfig> devices;  // default: builtin suite
    int n_days = 365;
    CivilDate start_date{2017, 1, 2};
    std::optional<MarketSeries> market;  // default: synthetic market
    SyntheticMarketParams market_params;
    int n_shuffles = 10;
    std::uint64_t base_seed = 42;
    std::vector<double> mu_grid{0.04, 0.08, 0.16};
    std::vector<int> flexibility_grid{0, 1, 2,  3,  4,  5,  6,  8,
                                      10, 12, 14, 16, 18, 20, 22};
    double comparison_noise_std = 2.0;  // forecast noise, experiment (d)
    PrequentialConfig base_run;
    int threads = 0;  // parallel experiment runs
};

struct ExperimentRun {
    std::string arm;
    double param = 0.0;  // mu, flexibility hours, or noise std
    int shuffle = 0;
    RunReport report;
};

struct ExperimentReport {
    std::string name;
    std::vector<ExperimentRun> runs;

    // Mean of a metric over the runs of one arm.
    double arm_mean(const std::string& arm,
                    double (*metric)(const RunReport&)) const;
};

struct PredictionComparisonRow {
    std::string model;  // "two_level" | "one_level"
    std::string scope;  // "regular" | "suite"
    int rep = 0;
    double day_accuracy = 0.0;
    double hour_rmse = 0.0;
};

struct ComparisonBundle {
    ExperimentReport flexibility_models;     // uniform vs adaptive mu grid
    std::vector<PredictionComparisonRow> prediction_levels;
    ExperimentReport ideal_vs_predicted;     // manual flexibility sweep
    ExperimentReport standard_vs_probabilistic;
};

ComparisonBundle run_comparisons(const ExperimentConfig& config);

// The one-level baseline: a single regression of "hours until the next ready
// action" fit on every day, day-level activity taken as the top decile of
// test days by predicted proximity.
struct OneLevelMetrics {
    double day_accuracy = 0.0;
    double hour_rmse = 0.0;
};

OneLevelMetrics evaluate_one_level(const std::vector<ObservedDay>& days, double split);

// Observed-day view of an event series over [start_date, start_date + n_days).
std::vector<ObservedDay> observed_days(const EventSeries& events,
                                       const CivilDate& start_date, int n_days);

}  // namespace flexsched

#endif
