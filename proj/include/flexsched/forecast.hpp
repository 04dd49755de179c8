#ifndef FLEXSCHED_FORECAST_HPP
#define FLEXSCHED_FORECAST_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flexsched/load_data.hpp"

namespace flexsched {

// ---------------------------------------------------------------------------
// Day-level activation classifier: naive Bayes over the calendar features,
// with Laplace smoothing on both the class prior and every conditional table.

class DayModel {
public:
    explicit DayModel(double alpha = 1.0);

    void observe(const CalendarFeatures& f, bool active);
    // Posterior P(active | f), normalized over the two classes.
    double predict(const CalendarFeatures& f) const;

    double alpha() const { return alpha_; }
    double observation_count() const { return class_counts_[0] + class_counts_[1]; }
    double class_count(bool active) const { return class_counts_[active ? 1 : 0]; }

    static constexpr int kFeatureCount = 5;
    static int feature_cardinality(int feature);
    static int feature_category(int feature, const CalendarFeatures& f);

    double table_count(int feature, bool active, int category) const;
    void set_table_count(int feature, bool active, int category, double count);
    void set_class_count(bool active, double count);

private:
    double alpha_;
    std::array<double, 2> class_counts_{};  // [inactive, active]
    std::array<std::array<std::vector<double>, 2>, kFeatureCount> counts_;
};

DayModel train_day_model(
    const std::vector<std::pair<CalendarFeatures, bool>>& days, double alpha);

// ---------------------------------------------------------------------------
// Hour-level regressors: ordinary least squares on encoded calendar features.

struct HourModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double residual_std = 0.5;  // floored at the configured minimum
    std::size_t n_training = 0;
    bool intercept_only = false;  // degenerate design, mean-only fallback
    bool rank_deficient = false;  // collinear columns solved by min-norm LS
};

// One-hot (drop-first) day-of-week/month/season, raw week number, weekend bit.
std::vector<double> encode_calendar(const CalendarFeatures& f);

HourModel train_hour_model(const std::vector<std::vector<double>>& features,
                           const std::vector<double>& targets,
                           double std_floor = 0.5);

double predict_hour(const HourModel& model, const std::vector<double>& features);

inline double clamp_hour(double h) {
    return h < 0.0 ? 0.0 : (h > 47.0 ? 47.0 : h);
}

// ---------------------------------------------------------------------------
// Discrete distributions over hours of the 48-hour scheduling horizon.

struct ForecastDistribution {
    std::vector<int> support;  // strictly increasing, within [0,47]
    std::vector<double> pmf;   // sums to 1 within 1e-9

    int mode() const;  // highest-probability hour, earliest on ties
    void validate() const;
};

// Discretized truncated normal on integer hours [lo,hi], trimmed to
// probabilities >= 1e-4 and renormalized.
ForecastDistribution build_distribution(double mean, double std, int lo, int hi);

struct ActivityForecast {
    double day_probability = 0.0;
    ForecastDistribution t_es_dist;
    // Conditional latest-end distribution per earliest-start support point,
    // sorted by t_es; every conditional support point is >= t_es + profile length.
    std::vector<std::pair<int, ForecastDistribution>> t_le_conditional;

    const ForecastDistribution& conditional_at(int t_es) const;
};

struct ForecastOptions {
    double std_floor = 0.5;
    // Truncation half-width of the discretized normal, in residual stds.
    double halfwidth_sigmas = 1.5;
    // Optional noise floor on the distribution std (experiment knob).
    double noise_std = 0.0;
};

// Returns nothing when the day-level posterior is at or below 0.5.
std::optional<ActivityForecast> forecast_activity(
    const DayModel& day_model, const HourModel& es_model,
    const HourModel& le_model, const CalendarFeatures& features,
    int signature_length, const ForecastOptions& options);

// The ceil(0.1 * N) highest-probability items; ties keep the earlier id.
std::vector<std::pair<std::int64_t, double>> select_top_decile(
    const std::vector<std::pair<std::int64_t, double>>& predictions);

// ---------------------------------------------------------------------------
// Stateful forecaster for prequential evaluation: the day model is updated
// incrementally, the hour models are refit after each observed day (full
// history by default, sliding window when configured).

struct ObservedDay {
    CivilDate date;
    bool active = false;
    int ready_hour = 0;          // 0..23, valid when active
    int next_ready_offset = 47;  // hours from day start to the next ready action
    bool has_next = false;
    // Hours from day start to the first ready action at or after it, clamped
    // to the horizon; equals ready_hour on active days.
    int first_ready_ahead = 47;
};

struct ForecasterConfig {
    double alpha = 1.0;
    double std_floor = 0.5;
    double halfwidth_sigmas = 1.5;
    double noise_std = 0.0;
    int window_days = 0;  // 0 = full history
};

class ActivityForecaster {
public:
    ActivityForecaster(const ForecasterConfig& config, int signature_length);

    void fit(const std::vector<ObservedDay>& days);
    void update(const ObservedDay& day);

    double day_probability(const CivilDate& date) const;
    double predict_ready_hour(const CivilDate& date) const;  // clamped [0,47]
    std::optional<ActivityForecast> forecast(const CivilDate& date) const;

    const DayModel& day_model() const { return day_model_; }
    const HourModel& es_model() const { return es_model_; }
    const HourModel& le_model() const { return le_model_; }
    const ForecasterConfig& config() const { return config_; }
    int signature_length() const { return signature_length_; }
    std::size_t history_size() const { return active_days_.size(); }

    void set_models(DayModel day, HourModel es, HourModel le);

private:
    void refit_hour_models(const CivilDate& as_of);

    ForecasterConfig config_;
    int signature_length_;
    DayModel day_model_;
    HourModel es_model_;
    HourModel le_model_;
    std::vector<ObservedDay> active_days_;
};

}  // namespace flexsched

#endif
