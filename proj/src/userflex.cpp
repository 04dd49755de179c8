#include "flexsched/userflex.hpp"

#include <algorithm>
#include <cmath>

#include "flexsched/common.hpp"
#include "flexsched/rng.hpp"

namespace flexsched {

ContextKey ContextKey::from_index(int index) {
    ContextKey key;
    key.weekend = index >= 4;
    key.season = static_cast<Season>(index % 4);
    return key;
}

ContextKey ContextKey::from_date(const CivilDate& date) {
    const CalendarFeatures f = calendar_features(date);
    return ContextKey{f.is_weekend, f.season};
}

double survival_gradient(double lambda, double x, double y) {
    const double s = std::exp(-lambda * x);
    return 2.0 * (y - s) * x * s;
}

double sgd_step(double lambda, double mu, double x, double y) {
    if (lambda <= 0.0 || mu <= 0.0 || x < 0.0) {
        raise(ErrorCode::domain_error, "sgd_step requires lambda > 0, mu > 0, x >= 0");
    }
    return std::max(lambda - mu * survival_gradient(lambda, x, y), kLambdaFloor);
}

UserFlexModel::UserFlexModel(double mu0) : mu0_(mu0) {
    if (mu0 <= 0.0) {
        raise(ErrorCode::domain_error, "base learning rate must be > 0");
    }
}

UserFlexModel UserFlexModel::uniform() {
    UserFlexModel model;
    model.uniform_ = true;
    return model;
}

double UserFlexModel::acceptance_probability(const ContextKey& context,
                                             double delay) const {
    if (delay < 0.0) {
        raise(ErrorCode::domain_error, "delay must be >= 0");
    }
    if (uniform_) return 1.0;
    return std::exp(-buckets_[static_cast<std::size_t>(context.index())].lambda * delay);
}

void UserFlexModel::update_online(const FeedbackObservation& obs) {
    if (obs.delay < 0.0) {
        raise(ErrorCode::invalid_observation, "delay must be >= 0");
    }
    if (!obs.accepted && !(obs.manual_delay >= 0.0 && obs.manual_delay < obs.delay)) {
        raise(ErrorCode::invalid_observation,
              "manual delay must lie in [0, proposed delay)");
    }
    if (uniform_) return;
    FlexBucket& b = buckets_[static_cast<std::size_t>(obs.context.index())];
    const double mu = mu0_ / (1.0 + static_cast<double>(b.n) / 50.0);
    if (obs.accepted) {
        // The user tolerated the full proposed delay.
        b.lambda = sgd_step(b.lambda, mu, obs.delay, 1.0);
    } else {
        // The need was realized by the manual activation time.
        b.lambda = sgd_step(b.lambda, mu, obs.manual_delay, 0.0);
    }
    ++b.n;
}

void UserFlexModel::reinitialize(const CivilDate& period_start) {
    for (FlexBucket& b : buckets_) b.n = 0;  // restores the full base rate
    last_reset_ = period_start;
}

double UserFlexModel::lambda(const ContextKey& context) const {
    return buckets_[static_cast<std::size_t>(context.index())].lambda;
}

void UserFlexModel::set_bucket(const ContextKey& context, const FlexBucket& bucket) {
    if (bucket.lambda <= 0.0) {
        raise(ErrorCode::domain_error, "bucket rate must be > 0");
    }
    buckets_[static_cast<std::size_t>(context.index())] = bucket;
}

const FlexBucket& UserFlexModel::bucket(const ContextKey& context) const {
    return buckets_[static_cast<std::size_t>(context.index())];
}

double UserFlexModel::mean_lambda() const {
    double weighted = 0.0, weight = 0.0, plain = 0.0;
    for (const FlexBucket& b : buckets_) {
        weighted += static_cast<double>(b.n) * b.lambda;
        weight += static_cast<double>(b.n);
        plain += b.lambda;
    }
    if (weight > 0.0) return weighted / weight;
    return plain / ContextKey::kBucketCount;
}

namespace {

// Midrank empirical survival: tied intervals share the average of their
// ranks, so degenerate samples (all intervals equal) target 0.5 rather than
// an unreachable 0.
std::vector<std::pair<double, double>> survival_points(std::vector<double> intervals) {
    std::sort(intervals.begin(), intervals.end());
    const auto n = static_cast<double>(intervals.size());
    std::vector<std::pair<double, double>> points;
    points.reserve(intervals.size());
    std::size_t i = 0;
    while (i < intervals.size()) {
        std::size_t j = i;
        while (j < intervals.size() && intervals[j] == intervals[i]) ++j;
        const double midrank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        const double survival = 1.0 - (midrank - 0.5) / n;
        for (std::size_t k = i; k < j; ++k) {
            points.emplace_back(intervals[k], survival);
        }
        i = j;
    }
    return points;
}

}  // namespace

double fit_survival_rate(const std::vector<double>& intervals, double mu0,
                         int epochs, std::uint64_t shuffle_seed) {
    double mean = 0.0;
    for (double x : intervals) mean += x;
    mean /= static_cast<double>(intervals.size());
    double lambda = mean > 0.0 ? 1.0 / mean : 1.0;

    auto points = survival_points(intervals);
    Rng rng(shuffle_seed);
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(points);
        for (const auto& [x, y] : points) {
            const double mu = mu0 / (1.0 + static_cast<double>(step) / 50.0);
            lambda = sgd_step(lambda, mu, x, y);
            ++step;
        }
    }
    return lambda;
}

UserFlexModel fit_offline(const EventSeries& events, const OfflineFitConfig& config) {
    std::array<std::vector<double>, ContextKey::kBucketCount> per_bucket;
    std::vector<double> all;
    for (std::size_t i = 0; i + 1 < events.events.size(); ++i) {
        const OperationEvent& ev = events.events[i];
        const double gap = static_cast<double>(events.events[i + 1].ready_hour - ev.ready_hour);
        const ContextKey ctx =
            ContextKey::from_date(timestamp_from_hour(ev.ready_hour).date());
        per_bucket[static_cast<std::size_t>(ctx.index())].push_back(gap);
        all.push_back(gap);
    }
    if (all.empty()) {
        raise(ErrorCode::insufficient_data,
              "need at least two events to measure an inter-ready interval");
    }

    UserFlexModel model(config.online_mu0);
    const double global_lambda =
        fit_survival_rate(all, config.mu0, config.epochs, 0x5eedULL);
    for (int i = 0; i < ContextKey::kBucketCount; ++i) {
        FlexBucket bucket;
        const auto& xs = per_bucket[static_cast<std::size_t>(i)];
        if (xs.size() >= 2) {
            bucket.lambda = fit_survival_rate(xs, config.mu0, config.epochs,
                                              0x5eedULL + static_cast<std::uint64_t>(i) + 1);
            bucket.fitted = true;
        } else {
            bucket.lambda = global_lambda;  // inherit the global fit
        }
        model.set_bucket(ContextKey::from_index(i), bucket);
    }
    return model;
}

}  // namespace flexsched
