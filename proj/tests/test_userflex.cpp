#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flexsched/rng.hpp"
#include "flexsched/userflex.hpp"
#include "test_util.hpp"

using namespace flexsched;

namespace {

constexpr ContextKey kCtx{false, Season::winter};

UserFlexModel model_with_lambda(double lambda, double mu0 = 0.08) {
    UserFlexModel model(mu0);
    FlexBucket bucket;
    bucket.lambda = lambda;
    model.set_bucket(kCtx, bucket);
    return model;
}

}  // namespace

TEST_CASE("acceptance at zero delay is exactly one") {
    const UserFlexModel model = model_with_lambda(0.37);
    CHECK(model.acceptance_probability(kCtx, 0.0) == 1.0);
}

TEST_CASE("acceptance vanishes for very long delays") {
    const UserFlexModel model = model_with_lambda(0.1);
    CHECK(model.acceptance_probability(kCtx, 200.0) < 1e-8);
}

TEST_CASE("half-life arithmetic: ln2/24 at a day's delay is one half") {
    const UserFlexModel model = model_with_lambda(std::log(2.0) / 24.0);
    CHECK(model.acceptance_probability(kCtx, 24.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("negative delays are a domain error") {
    const UserFlexModel model = model_with_lambda(0.1);
    CHECK_THROWS_AS(model.acceptance_probability(kCtx, -1.0), Error);
}

TEST_CASE("acceptance is non-increasing in the delay") {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const UserFlexModel model = model_with_lambda(rng.next_uniform(1e-4, 2.0));
        const double d1 = rng.next_uniform(0.0, 40.0);
        const double d2 = d1 + rng.next_uniform(0.0, 20.0);
        CHECK(model.acceptance_probability(kCtx, d1) >=
              model.acceptance_probability(kCtx, d2));
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("zero residual leaves the rate unchanged") {
    const double lambda = 0.2, x = 7.0;
    const double y = std::exp(-lambda * x);
    CHECK(sgd_step(lambda, 0.5, x, y) == doctest::Approx(lambda).epsilon(1e-15));
}

TEST_CASE("zero delay carries no gradient") {
    CHECK(sgd_step(0.2, 0.5, 0.0, 0.0) == doctest::Approx(0.2));
    CHECK(sgd_step(0.2, 0.5, 0.0, 1.0) == doctest::Approx(0.2));
}

TEST_CASE("a large step hits the positivity floor") {
    // lambda=0.1, mu=0.5, x=10, y=1: survival exp(-1) ~ 0.3679, gradient
    // 2*(1-0.3679)*10*0.3679 ~ 4.651, step 2.326 > lambda.
    const double next = sgd_step(0.1, 0.5, 10.0, 1.0);
    CHECK(next == kLambdaFloor);
    const double grad = survival_gradient(0.1, 10.0, 1.0);
    CHECK(grad == doctest::Approx(4.651).epsilon(1e-3));
}

TEST_CASE("analytic gradient matches central finite differences") {
    // Extended precision for the difference quotient keeps rounding noise
    // well below the 1e-6 relative tolerance; degenerate zero-gradient
    // points (y == survival) are excluded by construction.
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const double lambda = rng.next_uniform(0.02, 0.8);
        const double x = rng.next_uniform(0.5, 4.0 / lambda);
        double y = rng.next_double();
        while (std::abs(y - std::exp(-lambda * x)) < 0.05) y = rng.next_double();
        const long double h = 1e-7L * static_cast<long double>(lambda);
        auto q = [&](long double l) {
            const long double r = static_cast<long double>(y) - std::exp(-l * x);
            return r * r;
        };
        const long double fd = (q(lambda + h) - q(lambda - h)) / (2.0L * h);
        const double analytic = survival_gradient(lambda, x, y);
        CHECK(std::abs(static_cast<double>(fd) - analytic) <=
              1e-6 * std::abs(analytic));
    }
}

TEST_CASE("rate stays positive under arbitrary updates") {
    Rng rng(29);
    UserFlexModel model = model_with_lambda(0.15, 0.5);
    for (int i = 0; i < 500; ++i) {
        FeedbackObservation obs;
        obs.context = kCtx;
        obs.delay = rng.next_uniform(0.0, 30.0);
        obs.accepted = rng.next_double() < 0.5;
        if (!obs.accepted) {
            if (obs.delay < 1e-9) obs.accepted = true;
            else obs.manual_delay = rng.next_uniform(0.0, obs.delay * 0.999);
        }
        model.update_online(obs);
        CHECK(model.lambda(kCtx) >= kLambdaFloor);
    }
}

// ---------------------------------------------------------------------------



TEST_CASE("offline fit tracks the closed-form rate on exponential data") {
    Rng rng(41);
    const double true_rate = 0.05;
    std::vector<double> gaps;
    double mean = 0.0;
    for (int i = 0; i < 500; ++i) {
        gaps.push_back(std::max(1.0, std::round(rng.next_exponential(true_rate))));
        mean += gaps.back();
    }
    mean /= static_cast<double>(gaps.size());
    const double mle = 1.0 / mean;
    const double fitted = fit_survival_rate(gaps, 0.002, 20, 99);
    CHECK(std::abs(fitted - mle) / mle <= 0.10);
}

TEST_CASE("identical intervals keep the rate near its initialization") {
    const std::vector<double> gaps(24, 24.0);
    const double fitted = fit_survival_rate(gaps, 0.002, 20, 7);
    CHECK(std::abs(fitted - 1.0 / 24.0) / (1.0 / 24.0) <= 0.5);
}

TEST_CASE("buckets with their own data fit independently") {
    // Eight January/February weeks: dense 10-hour weekday gaps, sparse
    // 24-hour weekend gaps. Intervals land in the bucket of their starting
    // event, so the weekday-winter rate must come out higher.
    EventSeries events;
    const std::int64_t mon = days_from_civil({2017, 1, 2}) * 24;
    for (int w = 0; w < 8; ++w) {
        for (int h : {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 120, 144}) {
            OperationEvent ev;
            ev.ready_hour = mon + w * 168 + h;
            ev.energy_per_hour = {1.0};
            events.events.push_back(ev);
        }
    }
    const UserFlexModel model = fit_offline(events, {});
    const double weekday = model.lambda(ContextKey{false, Season::winter});
    const double weekend = model.lambda(ContextKey{true, Season::winter});
    CHECK(weekday > weekend);  // shorter gaps mean a tighter user
    CHECK(model.bucket(ContextKey{false, Season::winter}).fitted);
    CHECK(model.bucket(ContextKey{true, Season::winter}).fitted);
    // Summer buckets saw no data and inherit the global fit.
    CHECK_FALSE(model.bucket(ContextKey{false, Season::summer}).fitted);
    CHECK(model.lambda(ContextKey{false, Season::summer}) ==
          model.lambda(ContextKey{true, Season::summer}));
}

TEST_CASE("offline fit requires at least one interval") {
    EventSeries events;
    OperationEvent ev;
    ev.ready_hour = 0;
    ev.energy_per_hour = {1.0};
    events.events.push_back(ev);
    CHECK_THROWS_AS(fit_offline(events, {}), Error);
}

// ---------------------------------------------------------------------------

TEST_CASE("sustained acceptance drives the rate down") {
    UserFlexModel model = model_with_lambda(0.4, 0.08);
    double previous = model.lambda(kCtx);
    for (int i = 0; i < 300; ++i) {
        model.update_online({kCtx, 6.0, true, 0.0});
        CHECK(model.lambda(kCtx) <= previous + 1e-12);
        previous = model.lambda(kCtx);
    }
    CHECK(model.acceptance_probability(kCtx, 6.0) > 0.9);
}

TEST_CASE("sustained rejection drives acceptance toward zero") {
    UserFlexModel model = model_with_lambda(0.05, 0.08);
    for (int i = 0; i < 400; ++i) {
        model.update_online({kCtx, 7.0, false, 6.0});
    }
    CHECK(model.acceptance_probability(kCtx, 6.0) < 0.15);
}

TEST_CASE("an observation matching the model is a fixed point") {
    UserFlexModel model = model_with_lambda(0.2, 0.08);
    const double delay = 5.0;
    const double before = model.lambda(kCtx);
    // Feed the expected survival as a pseudo-target through sgd_step.
    const double after = sgd_step(before, 0.08, delay, std::exp(-before * delay));
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("rejections need a manual delay below the proposal") {
    UserFlexModel model = model_with_lambda(0.2);
    CHECK_THROWS_AS(model.update_online({kCtx, 5.0, false, 5.0}), Error);
    CHECK_THROWS_AS(model.update_online({kCtx, 5.0, false, 7.0}), Error);
}

TEST_CASE("reinitialize restores the base learning rate but keeps the rate") {
    UserFlexModel model = model_with_lambda(0.25, 0.08);
    for (int i = 0; i < 200; ++i) {
        model.update_online({kCtx, 4.0, true, 0.0});
    }
    const double lambda_before = model.lambda(kCtx);
    CHECK(model.bucket(kCtx).n == 200);

    model.reinitialize({2017, 6, 1});
    CHECK(model.lambda(kCtx) == lambda_before);
    CHECK(model.bucket(kCtx).n == 0);
    REQUIRE(model.last_reset().has_value());

    // Idempotent.
    model.reinitialize({2017, 6, 1});
    CHECK(model.lambda(kCtx) == lambda_before);
    CHECK(model.bucket(kCtx).n == 0);

    // The next step moves by the full base learning rate again.
    const double expected =
        std::max(lambda_before - 0.08 * survival_gradient(lambda_before, 4.0, 1.0),
                 kLambdaFloor);
    model.update_online({kCtx, 4.0, true, 0.0});
    CHECK(model.lambda(kCtx) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("uniform models accept everything and never learn") {
    UserFlexModel model = UserFlexModel::uniform();
    CHECK(model.acceptance_probability(kCtx, 500.0) == 1.0);
    model.update_online({kCtx, 5.0, false, 2.0});
    CHECK(model.acceptance_probability(kCtx, 500.0) == 1.0);
}
