#include "flexsched/forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "flexsched/common.hpp"

namespace flexsched {

DayModel::DayModel(double alpha) : alpha_(alpha) {
    if (alpha <= 0.0) {
        raise(ErrorCode::domain_error, "smoothing pseudo-count must be > 0");
    }
    for (int f = 0; f < kFeatureCount; ++f) {
        for (int c = 0; c < 2; ++c) {
            counts_[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)]
                .assign(static_cast<std::size_t>(feature_cardinality(f)), 0.0);
        }
    }
}

int DayModel::feature_cardinality(int feature) {
    switch (feature) {
        case 0: return 7;   // day of week
        case 1: return 53;  // week of year
        case 2: return 12;  // month
        case 3: return 2;   // weekend
        case 4: return 4;   // season
    }
    raise(ErrorCode::internal_error, "bad feature index");
}

int DayModel::feature_category(int feature, const CalendarFeatures& f) {
    switch (feature) {
        case 0: return f.day_of_week;
        case 1: return std::clamp(f.week_of_year, 1, 53) - 1;
        case 2: return f.month - 1;
        case 3: return f.is_weekend ? 1 : 0;
        case 4: return static_cast<int>(f.season);
    }
    raise(ErrorCode::internal_error, "bad feature index");
}

void DayModel::observe(const CalendarFeatures& f, bool active) {
    const std::size_t cls = active ? 1 : 0;
    class_counts_[cls] += 1.0;
    for (int feat = 0; feat < kFeatureCount; ++feat) {
        const auto cat = static_cast<std::size_t>(feature_category(feat, f));
        counts_[static_cast<std::size_t>(feat)][cls][cat] += 1.0;
    }
}

double DayModel::predict(const CalendarFeatures& f) const {
    // Log-space product rule over the fixed feature set; the result does not
    // depend on any enumeration order.
    const double total = class_counts_[0] + class_counts_[1];
    double log_post[2];
    for (std::size_t cls = 0; cls < 2; ++cls) {
        double lp = std::log((class_counts_[cls] + alpha_) / (total + 2.0 * alpha_));
        for (int feat = 0; feat < kFeatureCount; ++feat) {
            const auto cat = static_cast<std::size_t>(feature_category(feat, f));
            const double cardinality = feature_cardinality(feat);
            const double num = counts_[static_cast<std::size_t>(feat)][cls][cat] + alpha_;
            const double den = class_counts_[cls] + alpha_ * cardinality;
            lp += std::log(num / den);
        }
        log_post[cls] = lp;
    }
    const double m = std::max(log_post[0], log_post[1]);
    const double z0 = std::exp(log_post[0] - m);
    const double z1 = std::exp(log_post[1] - m);
    return z1 / (z0 + z1);
}

double DayModel::table_count(int feature, bool active, int category) const {
    return counts_[static_cast<std::size_t>(feature)][active ? 1 : 0]
                  [static_cast<std::size_t>(category)];
}

void DayModel::set_table_count(int feature, bool active, int category, double count) {
    counts_[static_cast<std::size_t>(feature)][active ? 1 : 0]
           [static_cast<std::size_t>(category)] = count;
}

void DayModel::set_class_count(bool active, double count) {
    class_counts_[active ? 1 : 0] = count;
}

DayModel train_day_model(
    const std::vector<std::pair<CalendarFeatures, bool>>& days, double alpha) {
    if (days.empty()) {
        raise(ErrorCode::insufficient_data, "day model needs at least one training day");
    }
    DayModel model(alpha);
    for (const auto& [features, active] : days) {
        model.observe(features, active);
    }
    return model;
}

// ---------------------------------------------------------------------------

std::vector<double> encode_calendar(const CalendarFeatures& f) {
    std::vector<double> x;
    x.reserve(22);
    for (int d = 1; d < 7; ++d) x.push_back(f.day_of_week == d ? 1.0 : 0.0);
    x.push_back(static_cast<double>(f.week_of_year));
    for (int m = 2; m <= 12; ++m) x.push_back(f.month == m ? 1.0 : 0.0);
    x.push_back(f.is_weekend ? 1.0 : 0.0);
    for (int s = 1; s < 4; ++s) {
        x.push_back(static_cast<int>(f.season) == s ? 1.0 : 0.0);
    }
    return x;
}

HourModel train_hour_model(const std::vector<std::vector<double>>& features,
                           const std::vector<double>& targets,
                           double std_floor) {
    if (features.size() != targets.size()) {
        raise(ErrorCode::dimension_error, "feature/target count mismatch");
    }
    if (features.size() < 2) {
        raise(ErrorCode::insufficient_data, "hour model needs at least 2 samples");
    }
    const auto n = static_cast<Eigen::Index>(features.size());
    const auto dim = static_cast<Eigen::Index>(features.front().size());
    for (const auto& row : features) {
        if (static_cast<Eigen::Index>(row.size()) != dim) {
            raise(ErrorCode::dimension_error, "ragged feature rows");
        }
    }
    for (double t : targets) {
        if (t < 0.0 || t > 47.0) {
            raise(ErrorCode::domain_error, "hour target outside [0,47]");
        }
    }

    Eigen::MatrixXd design(n, dim + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
            design(i, j + 1) = features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        y(i) = targets[static_cast<std::size_t>(i)];
    }

    HourModel model;
    model.n_training = features.size();

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::Index rank = cod.rank();
    Eigen::VectorXd beta;
    if (rank <= 1) {
        // No informative feature column: mean-only model.
        model.intercept_only = true;
        beta = Eigen::VectorXd::Zero(dim + 1);
        beta(0) = y.mean();
    } else {
        // Minimum-norm least squares; collinear calendar encodings (weekend
        // vs day-of-week dummies, season vs month) make exact rank
        // deficiency the common case on full-year data.
        beta = cod.solve(y);
        model.rank_deficient = rank < dim + 1;
    }

    model.intercept = beta(0);
    model.weights.assign(static_cast<std::size_t>(dim), 0.0);
    for (Eigen::Index j = 0; j < dim; ++j) {
        model.weights[static_cast<std::size_t>(j)] = beta(j + 1);
    }

    const Eigen::VectorXd residuals = y - design * beta;
    const double var = residuals.squaredNorm() / static_cast<double>(n);
    model.residual_std = std::max(std::sqrt(var), std_floor);
    return model;
}

double predict_hour(const HourModel& model, const std::vector<double>& features) {
    if (features.size() != model.weights.size()) {
        raise(ErrorCode::dimension_error,
              "expected " + std::to_string(model.weights.size()) + " features, got " +
                  std::to_string(features.size()));
    }
    double value = model.intercept;
    for (std::size_t i = 0; i < features.size(); ++i) {
        value += model.weights[i] * features[i];
    }
    return value;
}

// ---------------------------------------------------------------------------

int ForecastDistribution::mode() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pmf.size(); ++i) {
        if (pmf[i] > pmf[best]) best = i;
    }
    return support[best];
}

void ForecastDistribution::validate() const {
    if (support.size() != pmf.size() || support.empty()) {
        raise(ErrorCode::internal_error, "malformed distribution");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] < 0.0) raise(ErrorCode::internal_error, "negative probability");
        if (support[i] < 0 || support[i] >= kHorizonHours) {
            raise(ErrorCode::internal_error, "support outside 48-hour horizon");
        }
        if (i > 0 && support[i] <= support[i - 1]) {
            raise(ErrorCode::internal_error, "support not strictly increasing");
        }
        sum += pmf[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        raise(ErrorCode::internal_error, "pmf does not sum to 1");
    }
}

ForecastDistribution build_distribution(double mean, double std, int lo, int hi) {
    if (std <= 0.0) {
        raise(ErrorCode::domain_error, "distribution std must be > 0");
    }
    if (hi < lo) {
        raise(ErrorCode::empty_input, "empty distribution support");
    }
    if (lo < 0 || hi >= kHorizonHours) {
        raise(ErrorCode::domain_error, "support outside 48-hour horizon");
    }

    ForecastDistribution dist;
    std::vector<double> weights;
    double max_exponent = -1e300;
    for (int h = lo; h <= hi; ++h) {
        const double z = (h - mean) / std;
        max_exponent = std::max(max_exponent, -0.5 * z * z);
    }
    double total = 0.0;
    for (int h = lo; h <= hi; ++h) {
        const double z = (h - mean) / std;
        const double w = std::exp(-0.5 * z * z - max_exponent);
        weights.push_back(w);
        total += w;
    }
    // Trim negligible tail mass, then renormalize over what remains.
    double kept = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double p = weights[i] / total;
        if (p >= 1e-4) {
            dist.support.push_back(lo + static_cast<int>(i));
            dist.pmf.push_back(p);
            kept += p;
        }
    }
    for (double& p : dist.pmf) p /= kept;
    dist.validate();
    return dist;
}

const ForecastDistribution& ActivityForecast::conditional_at(int t_es) const {
    for (const auto& [t, dist] : t_le_conditional) {
        if (t == t_es) return dist;
    }
    raise(ErrorCode::internal_error,
          "no conditional distribution for t_es=" + std::to_string(t_es));
}

std::optional<ActivityForecast> forecast_activity(
    const DayModel& day_model, const HourModel& es_model,
    const HourModel& le_model, const CalendarFeatures& features,
    int signature_length, const ForecastOptions& options) {
    const double p_day = day_model.predict(features);
    if (p_day <= 0.5) return std::nullopt;
    if (signature_length < 1 || signature_length >= kHorizonHours) {
        raise(ErrorCode::domain_error, "signature length outside horizon");
    }

    const std::vector<double> x = encode_calendar(features);
    const double es_std = std::max(es_model.residual_std, options.noise_std);
    const double le_std = std::max(le_model.residual_std, options.noise_std);
    const int es_halfwidth =
        std::max(1, static_cast<int>(std::ceil(options.halfwidth_sigmas * es_std)));
    const int le_halfwidth =
        std::max(1, static_cast<int>(std::ceil(options.halfwidth_sigmas * le_std)));

    // Earliest start: keep the support low enough that at least one feasible
    // latest end (t_es + signature length) remains on the horizon.
    const double es_mu = clamp_hour(predict_hour(es_model, x));
    const int es_center = static_cast<int>(std::lround(es_mu));
    const int es_cap = kHorizonHours - 1 - signature_length;
    int es_lo = std::max(0, es_center - es_halfwidth);
    int es_hi = std::min(es_cap, es_center + es_halfwidth);
    es_lo = std::min(es_lo, es_hi);
    if (es_hi < 0) {
        raise(ErrorCode::infeasible, "no feasible earliest-start hour on the horizon");
    }

    ActivityForecast out;
    out.day_probability = p_day;
    out.t_es_dist = build_distribution(es_mu, es_std, es_lo, es_hi);

    std::vector<double> x_le = x;
    x_le.push_back(0.0);
    for (int t_es : out.t_es_dist.support) {
        x_le.back() = static_cast<double>(t_es);
        const double le_mu = clamp_hour(predict_hour(le_model, x_le));
        const int le_center = static_cast<int>(std::lround(le_mu));
        // Feasibility clamp: the operation must fit between start and end.
        const int feasible_lo = t_es + signature_length;
        int le_lo = std::max(feasible_lo, le_center - le_halfwidth);
        int le_hi = std::min(kHorizonHours - 1, le_center + le_halfwidth);
        le_lo = std::min(le_lo, kHorizonHours - 1);
        le_hi = std::max(le_hi, le_lo);
        out.t_le_conditional.emplace_back(
            t_es, build_distribution(le_mu, le_std, le_lo, le_hi));
    }
    return out;
}

std::vector<std::pair<std::int64_t, double>> select_top_decile(
    const std::vector<std::pair<std::int64_t, double>>& predictions) {
    if (predictions.empty()) {
        raise(ErrorCode::empty_input, "no predictions to rank");
    }
    std::vector<std::pair<std::int64_t, double>> sorted = predictions;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    const auto keep = static_cast<std::size_t>(
        std::ceil(0.1 * static_cast<double>(sorted.size())));
    sorted.resize(std::max<std::size_t>(keep, 1));
    return sorted;
}

// ---------------------------------------------------------------------------

ActivityForecaster::ActivityForecaster(const ForecasterConfig& config,
                                       int signature_length)
    : config_(config), signature_length_(signature_length), day_model_(config.alpha) {}

void ActivityForecaster::fit(const std::vector<ObservedDay>& days) {
    if (days.empty()) {
        raise(ErrorCode::insufficient_data, "forecaster needs at least one training day");
    }
    for (const ObservedDay& day : days) {
        day_model_.observe(calendar_features(day.date), day.active);
        if (day.active) active_days_.push_back(day);
    }
    refit_hour_models(days.back().date);
}

void ActivityForecaster::update(const ObservedDay& day) {
    day_model_.observe(calendar_features(day.date), day.active);
    if (day.active) active_days_.push_back(day);
    refit_hour_models(day.date);
}

void ActivityForecaster::refit_hour_models(const CivilDate& as_of) {
    std::vector<std::vector<double>> es_x, le_x;
    std::vector<double> es_y, le_y;
    const std::int64_t now = days_from_civil(as_of);
    for (const ObservedDay& day : active_days_) {
        if (config_.window_days > 0 &&
            now - days_from_civil(day.date) >= config_.window_days) {
            continue;
        }
        std::vector<double> x = encode_calendar(calendar_features(day.date));
        es_x.push_back(x);
        es_y.push_back(static_cast<double>(day.ready_hour));
        if (day.has_next) {
            x.push_back(static_cast<double>(day.ready_hour));
            le_x.push_back(std::move(x));
            le_y.push_back(static_cast<double>(day.next_ready_offset));
        }
    }
    if (es_x.size() >= 2) {
        es_model_ = train_hour_model(es_x, es_y, config_.std_floor);
    }
    if (le_x.size() >= 2) {
        le_model_ = train_hour_model(le_x, le_y, config_.std_floor);
    }
}

double ActivityForecaster::day_probability(const CivilDate& date) const {
    return day_model_.predict(calendar_features(date));
}

double ActivityForecaster::predict_ready_hour(const CivilDate& date) const {
    return clamp_hour(predict_hour(es_model_, encode_calendar(calendar_features(date))));
}

std::optional<ActivityForecast> ActivityForecaster::forecast(const CivilDate& date) const {
    ForecastOptions opts;
    opts.std_floor = config_.std_floor;
    opts.halfwidth_sigmas = config_.halfwidth_sigmas;
    opts.noise_std = config_.noise_std;
    return forecast_activity(day_model_, es_model_, le_model_,
                             calendar_features(date), signature_length_, opts);
}

void ActivityForecaster::set_models(DayModel day, HourModel es, HourModel le) {
    day_model_ = std::move(day);
    es_model_ = std::move(es);
    le_model_ = std::move(le);
}

}  // namespace flexsched
