#ifndef FLEXSCHED_USERFLEX_HPP
#define FLEXSCHED_USERFLEX_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "flexsched/load_data.hpp"
#include "flexsched/time.hpp"

namespace flexsched {

// Per-user acceptance is bucketed by weekday class and season: 8 contexts.
struct ContextKey {
    bool weekend = false;
    Season season = Season::winter;

    bool operator==(const ContextKey&) const = default;

    static constexpr int kBucketCount = 8;
    int index() const { return (weekend ? 4 : 0) + static_cast<int>(season); }
    static ContextKey from_index(int index);
    static ContextKey from_date(const CivilDate& date);
};

// Least-squares step on the exponential survival curve s(x) = exp(-lambda x):
//   Q(lambda) = (y - s(x))^2
//   dQ/dlambda = 2 (y - s(x)) * x * s(x)
// The result is floored at 1e-6 to keep the rate positive.
double sgd_step(double lambda, double mu, double x, double y);
double survival_gradient(double lambda, double x, double y);

constexpr double kLambdaFloor = 1e-6;

struct FlexBucket {
    double lambda = 0.1;  // 1/hours, > 0
    std::uint64_t n = 0;  // online observations since last reset
    bool fitted = false;  // own data, not inherited from the global fit
};

struct FeedbackObservation {
    ContextKey context;
    double delay = 0.0;  // proposed t - t_es, hours >= 0
    bool accepted = true;
    double manual_delay = 0.0;  // t_m - t_es when rejected, in [0, delay)
};

// Exponential survival model of schedule-delay acceptance, one rate per
// context bucket, adapted online from accept/reject feedback.
class UserFlexModel {
public:
    UserFlexModel() = default;
    explicit UserFlexModel(double mu0);

    // Uniform models accept everything and never learn; used as the
    // non-adaptive baseline.
    static UserFlexModel uniform();
    bool is_uniform() const { return uniform_; }

    double acceptance_probability(const ContextKey& context, double delay) const;
    void update_online(const FeedbackObservation& obs);
    void reinitialize(const CivilDate& period_start);

    double mu0() const { return mu0_; }
    double lambda(const ContextKey& context) const;
    void set_bucket(const ContextKey& context, const FlexBucket& bucket);
    const FlexBucket& bucket(const ContextKey& context) const;
    const std::optional<CivilDate>& last_reset() const { return last_reset_; }

    // Observation-weighted mean rate across buckets (falls back to the plain
    // mean when no online feedback has been seen).
    double mean_lambda() const;

private:
    double mu0_ = 0.08;
    bool uniform_ = false;
    std::array<FlexBucket, ContextKey::kBucketCount> buckets_{};
    std::optional<CivilDate> last_reset_;
};

struct OfflineFitConfig {
    double mu0 = 0.002;
    int epochs = 20;
    double online_mu0 = 0.08;  // stored in the resulting model
};

// Fits one rate per bucket from the inter-ready intervals of an event
// series: empirical survival points via midrank plotting positions, rate
// initialized at 1/mean, then refined by SGD over shuffled points. Buckets
// with fewer than 2 intervals inherit the global fit.
UserFlexModel fit_offline(const EventSeries& events, const OfflineFitConfig& config);

// Exposed for tests: the per-bucket fit on a plain interval sample.
double fit_survival_rate(const std::vector<double>& intervals, double mu0,
                         int epochs, std::uint64_t shuffle_seed);

}  // namespace flexsched

#endif
