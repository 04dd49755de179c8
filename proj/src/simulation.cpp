#include "flexsched/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flexsched/rng.hpp"

namespace flexsched {

// ---------------------------------------------------------------------------
// Built-in synthetic suite.

namespace {

struct CategorySpec {
    const char* name;
    double weekday_act;
    double weekend_act;
    std::vector<MixtureComponent> mixture;
    double lambda_weekday;
    double lambda_weekend;
    double energy_scale;
    double jitter_minus;
    double jitter_plus;
};

std::array<double, ContextKey::kBucketCount> lambda_by_context(double weekday,
                                                               double weekend) {
    // Seasonal tilt: tighter routines in winter, looser in summer.
    constexpr std::array<double, 4> seasonal = {1.1, 1.0, 0.85, 1.0};
    std::array<double, ContextKey::kBucketCount> out{};
    for (int i = 0; i < ContextKey::kBucketCount; ++i) {
        const ContextKey key = ContextKey::from_index(i);
        const double base = key.weekend ? weekend : weekday;
        out[static_cast<std::size_t>(i)] =
            base * seasonal[static_cast<std::size_t>(static_cast<int>(key.season))];
    }
    return out;
}

std::vector<CategorySpec> category_specs() {
    return {
        {"single_worker", 0.45, 0.65, {{1.0, 20.0, 1.5}}, 0.20, 0.12, 0.85, 0.10, 0.10},
        {"single_retiree", 0.55, 0.55, {{1.0, 13.0, 2.0}}, 0.10, 0.10, 0.80, 0.10, 0.10},
        {"couple_working", 0.65, 0.75, {{0.8, 19.5, 1.5}, {0.2, 7.0, 1.0}}, 0.18, 0.12, 1.00, 0.10, 0.15},
        {"couple_retired", 0.60, 0.60, {{1.0, 12.0, 1.5}}, 0.08, 0.08, 0.90, 0.10, 0.10},
        {"family_regular", 0.90, 0.80, {{1.0, 19.0, 1.2}}, 0.15, 0.10, 1.15, 0.05, 0.05},
        {"family_teens", 0.85, 0.90, {{0.6, 18.0, 2.5}, {0.4, 21.0, 1.5}}, 0.22, 0.15, 1.20, 0.10, 0.20},
        {"large_family", 0.95, 0.95, {{0.5, 10.0, 1.5}, {0.5, 19.0, 1.5}}, 0.25, 0.18, 1.30, 0.05, 0.20},
        {"shift_worker", 0.50, 0.50, {{0.5, 2.0, 2.0}, {0.5, 14.0, 2.0}}, 0.18, 0.18, 0.90, 0.10, 0.10},
        {"student_flat", 0.40, 0.70, {{1.0, 22.0, 2.0}}, 0.30, 0.20, 0.75, 0.15, 0.10},
        {"home_office", 0.70, 0.60, {{0.6, 11.0, 2.0}, {0.4, 16.0, 2.0}}, 0.12, 0.12, 0.95, 0.10, 0.10},
        {"eco_conscious", 0.50, 0.60, {{1.0, 13.0, 3.0}}, 0.06, 0.06, 0.70, 0.10, 0.05},
        {"weekend_batcher", 0.15, 0.90, {{1.0, 11.0, 2.0}}, 0.15, 0.25, 1.10, 0.05, 0.15},
        {"irregular_young", 0.35, 0.50,
         {{0.4, 9.0, 3.0}, {0.4, 17.0, 3.0}, {0.2, 22.0, 2.0}}, 0.35, 0.25, 0.80, 0.15, 0.15},
    };
}

SyntheticDeviceConfig device_from_spec(const CategorySpec& spec, bool dishwasher) {
    SyntheticDeviceConfig cfg;
    cfg.category = spec.name;
    cfg.device_id = std::string(spec.name) + (dishwasher ? "_dw" : "_wm");
    for (int d = 0; d < 7; ++d) {
        cfg.weekday_activation[static_cast<std::size_t>(d)] =
            d < 5 ? spec.weekday_act : spec.weekend_act;
    }
    cfg.ready_hour_mixture = spec.mixture;
    cfg.true_lambda = lambda_by_context(spec.lambda_weekday, spec.lambda_weekend);
    if (dishwasher) {
        cfg.signature.per_hour_demand = {1.05 * spec.energy_scale,
                                         0.75 * spec.energy_scale};
    } else {
        cfg.signature.per_hour_demand = {0.90 * spec.energy_scale,
                                         0.55 * spec.energy_scale,
                                         0.30 * spec.energy_scale};
    }
    cfg.jitter_minus = spec.jitter_minus;
    cfg.jitter_plus = spec.jitter_plus;
    return cfg;
}

}  // namespace

std::vector<SyntheticDeviceConfig> builtin_synthetic_suite() {
    std::vector<SyntheticDeviceConfig> suite;
    for (const CategorySpec& spec : category_specs()) {
        suite.push_back(device_from_spec(spec, true));
        suite.push_back(device_from_spec(spec, false));
    }
    return suite;
}

SyntheticDeviceConfig regular_profile_device() {
    for (const CategorySpec& spec : category_specs()) {
        if (std::string(spec.name) == "family_regular") {
            return device_from_spec(spec, true);
        }
    }
    raise(ErrorCode::internal_error, "regular profile missing from suite");
}

SyntheticData generate_synthetic(const SyntheticDeviceConfig& config,
                                 std::uint64_t seed, int n_days,
                                 const CivilDate& start_date) {
    if (n_days < 1) {
        raise(ErrorCode::config_error, "n_days must be >= 1");
    }
    double weight_sum = 0.0;
    for (const MixtureComponent& c : config.ready_hour_mixture) weight_sum += c.weight;
    if (config.ready_hour_mixture.empty() || std::abs(weight_sum - 1.0) > 1e-9) {
        raise(ErrorCode::config_error, "mixture weights must sum to 1");
    }

    const std::int64_t start_day = days_from_civil(start_date);
    const std::int64_t start_hour = start_day * 24;
    const int k = config.signature.length();

    Rng rng(seed);
    EventSeries events;
    events.device_id = config.device_id;
    for (int d = 0; d < n_days; ++d) {
        const int dow = weekday_from_days(start_day + d);
        if (rng.next_double() >= config.weekday_activation[static_cast<std::size_t>(dow)]) {
            continue;
        }
        // Duration jitter is drawn once per activation, the hour is retried
        // on collision with the previous event.
        int duration = k;
        const double uj = rng.next_double();
        if (uj < config.jitter_minus) {
            duration = std::max(1, k - 1);
        } else if (uj < config.jitter_minus + config.jitter_plus) {
            duration = k + 1;
        }

        bool placed = false;
        for (int attempt = 0; attempt < 4 && !placed; ++attempt) {
            double u = rng.next_double();
            const MixtureComponent* comp = &config.ready_hour_mixture.back();
            for (const MixtureComponent& c : config.ready_hour_mixture) {
                if (u < c.weight) {
                    comp = &c;
                    break;
                }
                u -= c.weight;
            }
            const double drawn = rng.next_normal(comp->mean_hour, comp->std_hours);
            const int hour = std::clamp(static_cast<int>(std::lround(drawn)), 0, 23);
            const std::int64_t ready = (start_day + d) * 24 + hour;
            // Keep at least one idle hour after the previous operation so
            // threshold extraction sees two separate events.
            if (!events.events.empty()) {
                const OperationEvent& prev = events.events.back();
                if (ready < prev.ready_hour + prev.duration_hours + 1) continue;
            }
            OperationEvent ev;
            ev.ready_hour = ready;
            ev.duration_hours = duration;
            ev.duration_exact = duration;
            for (int i = 0; i < duration; ++i) {
                const auto si = static_cast<std::size_t>(std::min(i, k - 1));
                ev.energy_per_hour.push_back(config.signature.per_hour_demand[si]);
            }
            events.events.push_back(std::move(ev));
            placed = true;
        }
    }

    SyntheticData out;
    out.events = std::move(events);
    out.load = render_events(out.events, start_hour,
                             static_cast<std::int64_t>(n_days) * 24 + 24);
    return out;
}

MarketSeries generate_synthetic_market(std::int64_t start_hour, int n_days,
                                       std::uint64_t seed,
                                       const SyntheticMarketParams& params) {
    // Residential price shape: morning ramp, evening peak, cheap night.
    static constexpr std::array<double, 24> shape = {
        0.60, 0.55, 0.50, 0.50, 0.55, 0.65, 0.85, 1.00, 1.05, 1.00, 0.95, 0.90,
        0.85, 0.85, 0.90, 1.00, 1.15, 1.30, 1.35, 1.25, 1.10, 0.90, 0.75, 0.65};

    Rng rng(seed);
    MarketSeries m;
    m.start_hour = start_hour;
    m.records.reserve(static_cast<std::size_t>(n_days) * 24);
    for (int d = 0; d < n_days; ++d) {
        const double day_level = 1.0 + 0.1 * rng.next_normal(0.0, 1.0);
        for (int h = 0; h < 24; ++h) {
            MarketRecord rec;
            rec.spot = std::max(
                0.01, params.base_price * shape[static_cast<std::size_t>(h)] * day_level +
                          rng.next_normal(0.0, params.noise_std));
            rec.up_price = rec.spot + std::abs(rng.next_normal(params.up_spread, 0.03));
            rec.down_price =
                std::max(0.0, rec.spot - std::abs(rng.next_normal(params.down_spread, 0.03)));
            const double u = rng.next_double();
            if (u < params.p_up) {
                rec.reg_volume = rng.next_exponential(1.0 / params.volume_scale);
            } else if (u < params.p_up + params.p_down) {
                rec.reg_volume = -rng.next_exponential(1.0 / params.volume_scale);
            }
            m.records.push_back(rec);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

const char* oracle_mode_name(OracleMode mode) {
    switch (mode) {
        case OracleMode::deadline: return "deadline";
        case OracleMode::stochastic: return "stochastic";
        case OracleMode::both: return "both";
    }
    return "?";
}

OracleMode oracle_mode_from_name(const std::string& name) {
    if (name == "deadline") return OracleMode::deadline;
    if (name == "stochastic") return OracleMode::stochastic;
    if (name == "both") return OracleMode::both;
    raise(ErrorCode::config_error, "unknown oracle mode '" + name + "'");
}

OracleDecision simulate_user_decision(const OracleUser& oracle,
                                      std::int64_t chosen_hour,
                                      std::int64_t ready_hour,
                                      std::optional<std::int64_t> next_ready_hour,
                                      int operation_hours, const ContextKey& context,
                                      std::uint64_t seed) {
    OracleDecision decision;
    const std::int64_t delay = chosen_hour - ready_hour;
    if (delay < 0) {
        // Scheduled before the device was ready; the user starts it manually
        // at their own time.
        decision.feasible = false;
        decision.manual_delay = 0.0;
        return decision;
    }

    const bool check_deadline =
        oracle.mode == OracleMode::deadline || oracle.mode == OracleMode::both;
    const bool check_stochastic =
        oracle.mode == OracleMode::stochastic || oracle.mode == OracleMode::both;

    if (check_deadline && next_ready_hour &&
        chosen_hour + operation_hours > *next_ready_hour) {
        decision.manual_delay = 0.0;  // deadline miss: original time kept
        return decision;
    }

    Rng rng(seed);
    if (check_stochastic) {
        const double rate =
            oracle.true_lambda[static_cast<std::size_t>(context.index())];
        if (rng.next_double() >= std::exp(-rate * static_cast<double>(delay))) {
            std::int64_t slack = delay - 1;
            if (next_ready_hour) {
                slack = std::min(slack, std::max<std::int64_t>(
                                            0, *next_ready_hour - ready_hour - operation_hours));
            }
            decision.manual_delay =
                slack > 0 ? static_cast<double>(rng.next_int(0, slack)) : 0.0;
            return decision;
        }
    }
    decision.accepted = true;
    return decision;
}

// ---------------------------------------------------------------------------

DeviceData device_data_from_config(const SyntheticDeviceConfig& config,
                                   std::uint64_t seed, int n_days,
                                   const CivilDate& start_date) {
    SyntheticData synth = generate_synthetic(config, seed, n_days, start_date);
    DeviceData data;
    data.device_id = config.device_id;
    data.events = std::move(synth.events);
    data.signature = config.signature;
    data.true_lambda = config.true_lambda;
    data.start_date = start_date;
    data.n_days = n_days;
    return data;
}

std::vector<ObservedDay> observed_days(const EventSeries& events,
                                       const CivilDate& start_date, int n_days) {
    const std::int64_t start_day = days_from_civil(start_date);
    std::vector<ObservedDay> days;
    days.reserve(static_cast<std::size_t>(n_days));
    std::size_t cursor = 0;
    for (int d = 0; d < n_days; ++d) {
        const std::int64_t day_start = (start_day + d) * 24;
        ObservedDay day;
        day.date = civil_from_days(start_day + d);
        while (cursor < events.events.size() &&
               events.events[cursor].ready_hour < day_start) {
            ++cursor;
        }
        // First ready action at or after the day start, for the one-level view.
        if (cursor < events.events.size()) {
            day.first_ready_ahead = static_cast<int>(std::min<std::int64_t>(
                events.events[cursor].ready_hour - day_start, 47));
        }
        if (cursor < events.events.size() &&
            events.events[cursor].ready_hour < day_start + 24) {
            day.active = true;
            day.ready_hour = static_cast<int>(events.events[cursor].ready_hour - day_start);
            if (cursor + 1 < events.events.size()) {
                day.has_next = true;
                day.next_ready_offset = static_cast<int>(std::min<std::int64_t>(
                    events.events[cursor + 1].ready_hour - day_start, 47));
            }
        }
        days.push_back(day);
    }
    return days;
}

DeviceTrace build_device_trace(const DeviceData& data, double split,
                               const ForecasterConfig& forecaster_config) {
    if (data.n_days < 30) {
        raise(ErrorCode::config_error,
              "device " + data.device_id + " spans fewer than 30 days");
    }
    const int n_train = static_cast<int>(std::floor(split * data.n_days));
    if (n_train < 1 || n_train >= data.n_days) {
        raise(ErrorCode::config_error, "split leaves an empty train or test span");
    }
    const std::int64_t start_day = days_from_civil(data.start_date);
    const std::int64_t test_start_hour = (start_day + n_train) * 24;

    std::vector<ObservedDay> days = observed_days(data.events, data.start_date, data.n_days);

    DeviceTrace trace;
    trace.data = data;
    trace.training_events.device_id = data.device_id;
    for (const OperationEvent& ev : data.events.events) {
        if (ev.ready_hour < test_start_hour) trace.training_events.events.push_back(ev);
    }
    if (trace.training_events.events.size() < 2) {
        raise(ErrorCode::insufficient_data,
              "device " + data.device_id + " has fewer than 2 training events");
    }
    trace.signature = extract_signature(trace.training_events);

    // Strictly prequential training set: drop next-ready targets that are
    // only realized inside the test span.
    std::vector<ObservedDay> train_days(days.begin(), days.begin() + n_train);
    int active_train = 0;
    for (ObservedDay& day : train_days) {
        if (day.active) {
            ++active_train;
            const std::int64_t next_global =
                days_from_civil(day.date) * 24 + day.next_ready_offset;
            if (day.has_next && next_global >= test_start_hour) day.has_next = false;
        }
    }
    if (active_train < 2) {
        raise(ErrorCode::insufficient_data,
              "device " + data.device_id + " has fewer than 2 active training days");
    }

    ActivityForecaster forecaster(forecaster_config, trace.signature.length());
    forecaster.fit(train_days);

    std::size_t cursor = 0;
    for (int d = n_train; d < data.n_days; ++d) {
        const ObservedDay& day = days[static_cast<std::size_t>(d)];
        DayTrace dt;
        dt.date = day.date;
        dt.day_start_hour = (start_day + d) * 24;
        dt.actual_active = day.active;
        if (day.active) {
            dt.ready_hour = day.ready_hour;
            dt.ready_global = dt.day_start_hour + day.ready_hour;
            while (cursor < data.events.events.size() &&
                   data.events.events[cursor].ready_hour < dt.ready_global) {
                ++cursor;
            }
            if (cursor + 1 < data.events.events.size()) {
                dt.next_ready_global = data.events.events[cursor + 1].ready_hour;
            }
        }
        // Test-then-train: predict before the day is folded into the models.
        const double p_day = forecaster.day_probability(day.date);
        dt.predicted_active = p_day > 0.5;
        dt.es_prediction = forecaster.predict_ready_hour(day.date);
        if (dt.predicted_active) {
            dt.forecast = forecaster.forecast(day.date);
        }
        forecaster.update(day);
        trace.test_days.push_back(std::move(dt));
    }
    return trace;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string config_digest(const PrequentialConfig& cfg, std::size_t n_devices) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "split=%.6f;oracle=%s;adaptive=%d;mu0=%.6f;offer=%d;manual=%d;"
                  "ideal=%d;reset=%d;seed=%llu;devices=%zu;skip_first_reg=%d",
                  cfg.split, oracle_mode_name(cfg.oracle_mode),
                  cfg.adaptive_flex ? 1 : 0, cfg.online_mu0,
                  static_cast<int>(cfg.offer_kind), cfg.manual_flexibility,
                  cfg.ideal_start ? 1 : 0, static_cast<int>(cfg.reset),
                  static_cast<unsigned long long>(cfg.seed), n_devices,
                  cfg.market_options.skip_first_reg_hour ? 1 : 0);
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(fnv1a(buf)));
    return digest;
}

ProbabilisticFlexOffer point_offer(int t_es, int t_le,
                                   const DeviceSignature& sig) {
    ProbabilisticFlexOffer pfo;
    pfo.t_es_dist.support = {t_es};
    pfo.t_es_dist.pmf = {1.0};
    ForecastDistribution le;
    le.support = {t_le};
    le.pmf = {1.0};
    pfo.t_le_conditional.emplace_back(t_es, std::move(le));
    pfo.profile = profile_from_signature(sig);
    return pfo;
}

bool crossed_reset_boundary(ResetPolicy policy, const CivilDate& prev,
                            const CivilDate& current) {
    switch (policy) {
        case ResetPolicy::none: return false;
        case ResetPolicy::monthly:
            return prev.month != current.month || prev.year != current.year;
        case ResetPolicy::seasonal:
            return season_of_month(prev.month) != season_of_month(current.month);
    }
    return false;
}

}  // namespace

RunReport replay_run(const std::vector<DeviceTrace>& traces,
                     const MarketSeries& market, const PrequentialConfig& config) {
    RunReport report;
    report.seeds = {config.seed};
    report.config_digest = config_digest(config, traces.size());

    std::int64_t correct_days = 0;
    double squared_error = 0.0;
    std::int64_t active_days = 0;
    double lambda_weighted = 0.0;
    double lambda_weight = 0.0;

    for (std::size_t device_idx = 0; device_idx < traces.size(); ++device_idx) {
        const DeviceTrace& trace = traces[device_idx];
        const int k = trace.signature.length();

        UserFlexModel flex =
            config.adaptive_flex
                ? fit_offline(trace.training_events,
                              OfflineFitConfig{config.offline_fit.mu0,
                                               config.offline_fit.epochs,
                                               config.online_mu0})
                : UserFlexModel::uniform();
        OracleUser oracle{config.oracle_mode, trace.data.true_lambda};

        CivilDate prev_date = trace.test_days.empty() ? trace.data.start_date
                                                      : trace.test_days.front().date;
        for (std::size_t day_idx = 0; day_idx < trace.test_days.size(); ++day_idx) {
            const DayTrace& day = trace.test_days[day_idx];
            ++report.n_test_days;
            if (day.predicted_active == day.actual_active) ++correct_days;
            if (day.actual_active) {
                ++active_days;
                const double err = day.es_prediction - day.ready_hour;
                squared_error += err * err;
            }
            if (crossed_reset_boundary(config.reset, prev_date, day.date)) {
                flex.reinitialize(day.date);
            }
            prev_date = day.date;

            if (!day.predicted_active || !day.actual_active) continue;
            if (!market.covers(day.day_start_hour, kHorizonHours)) continue;

            ProbabilisticFlexOffer pfo;
            switch (config.offer_kind) {
                case OfferKind::probabilistic:
                    pfo = make_probabilistic_flexoffer(*day.forecast, trace.signature);
                    break;
                case OfferKind::standard: {
                    const FlexOffer fo = collapse_to_standard(
                        make_probabilistic_flexoffer(*day.forecast, trace.signature));
                    pfo = point_offer(fo.t_es, fo.t_le(), trace.signature);
                    break;
                }
                case OfferKind::manual: {
                    const int cap = kHorizonHours - 1 - k;
                    const int t_ref =
                        config.ideal_start
                            ? day.ready_hour
                            : std::clamp(static_cast<int>(std::lround(day.es_prediction)),
                                         0, cap);
                    const int t_ls = std::min(t_ref + config.manual_flexibility, cap);
                    pfo = point_offer(t_ref, t_ls + k, trace.signature);
                    break;
                }
            }

            SchedulerContext ctx;
            ctx.market = &market;
            ctx.flex = &flex;
            ctx.context = ContextKey::from_date(day.date);
            ctx.day_offset_hours = day.day_start_hour;
            ctx.market_options = config.market_options;
            ctx.threads = config.scheduler_threads;

            const ScheduleProposal proposal = schedule(pfo, ctx, trace.data.device_id);
            const std::int64_t chosen_global = day.day_start_hour + proposal.chosen_t;
            const std::int64_t true_delay = chosen_global - day.ready_global;

            const OracleDecision decision = simulate_user_decision(
                oracle, chosen_global, day.ready_global, day.next_ready_global, k,
                ctx.context, derive_seed(config.seed, device_idx * 100003 + day_idx));

            ProposalRecord record;
            record.device_id = trace.data.device_id;
            record.date = day.date;
            record.reference_t_es = proposal.reference_t_es;
            record.chosen_t = proposal.chosen_t;
            record.delay = static_cast<double>(proposal.chosen_t - proposal.reference_t_es);
            record.delta_spot = proposal.savings.delta_spot;
            record.delta_reg = proposal.savings.delta_reg;
            record.acceptance_prob = flex.acceptance_probability(
                ctx.context, std::max(record.delay, 0.0));
            record.accepted = decision.accepted;
            report.proposals.push_back(record);

            ++report.n_proposals;
            if (decision.accepted) {
                ++report.n_accepted;
                // Realized savings against the unshifted operation.
                report.total_spot_savings += spot_savings(
                    pfo.profile, day.ready_global, chosen_global, market);
                report.total_reg_savings +=
                    reg_savings(pfo.profile, day.ready_global, chosen_global, market,
                                config.market_options);
                report.baseline_spot_cost +=
                    spot_cost(pfo.profile, day.ready_global, market);
                report.baseline_reg_cost += std::abs(reg_contribution(
                    pfo.profile, day.ready_global, market, config.market_options));
            } else {
                ++report.n_rejected;
            }

            if (config.adaptive_flex && decision.feasible) {
                FeedbackObservation obs;
                obs.context = ctx.context;
                obs.delay = static_cast<double>(true_delay);
                obs.accepted = decision.accepted;
                obs.manual_delay = decision.manual_delay;
                flex.update_online(obs);
                ++report.n_feedback;
            }
        }

        for (int b = 0; b < ContextKey::kBucketCount; ++b) {
            const FlexBucket& bucket = flex.bucket(ContextKey::from_index(b));
            lambda_weighted += static_cast<double>(bucket.n) * bucket.lambda;
            lambda_weight += static_cast<double>(bucket.n);
        }
    }

    if (report.n_test_days > 0) {
        report.day_accuracy =
            static_cast<double>(correct_days) / static_cast<double>(report.n_test_days);
    }
    if (active_days > 0) {
        report.hour_rmse = std::sqrt(squared_error / static_cast<double>(active_days));
    }
    if (report.n_proposals > 0) {
        report.acceptance_rate = static_cast<double>(report.n_accepted) /
                                 static_cast<double>(report.n_proposals);
    }
    if (report.baseline_spot_cost > 1e-12) {
        report.spot_savings_pct =
            100.0 * report.total_spot_savings / report.baseline_spot_cost;
    }
    if (report.baseline_reg_cost > 1e-12) {
        report.reg_savings_pct =
            100.0 * report.total_reg_savings / report.baseline_reg_cost;
    }
    if (lambda_weight > 0.0) {
        report.mean_lambda = lambda_weighted / lambda_weight;
    }
    return report;
}

RunReport run_prequential(const std::vector<DeviceData>& devices,
                          const MarketSeries& market, const PrequentialConfig& config) {
    if (devices.empty()) {
        raise(ErrorCode::config_error, "no devices configured");
    }
    std::vector<DeviceTrace> traces;
    traces.reserve(devices.size());
    for (const DeviceData& device : devices) {
        traces.push_back(build_device_trace(device, config.split, config.forecaster));
    }
    return replay_run(traces, market, config);
}

// ---------------------------------------------------------------------------

OneLevelMetrics evaluate_one_level(const std::vector<ObservedDay>& days, double split) {
    const auto n = static_cast<int>(days.size());
    const int n_train = static_cast<int>(std::floor(split * n));
    if (n_train < 2 || n_train >= n) {
        raise(ErrorCode::config_error, "one-level baseline needs train and test days");
    }

    std::vector<std::vector<double>> features;
    std::vector<double> targets;
    for (int i = 0; i < n_train; ++i) {
        const ObservedDay& day = days[static_cast<std::size_t>(i)];
        features.push_back(encode_calendar(calendar_features(day.date)));
        targets.push_back(static_cast<double>(day.first_ready_ahead));
    }

    // Prequential like the two-level pipeline: predict, then fold the day in.
    std::vector<std::pair<std::int64_t, double>> scores;
    std::vector<double> predictions;
    for (int i = n_train; i < n; ++i) {
        const ObservedDay& day = days[static_cast<std::size_t>(i)];
        const HourModel model = train_hour_model(features, targets);
        const double pred =
            clamp_hour(predict_hour(model, encode_calendar(calendar_features(day.date))));
        predictions.push_back(pred);
        // Nearer predicted activity ranks as more probable today.
        scores.emplace_back(i - n_train, 1.0 - pred / 48.0);
        features.push_back(encode_calendar(calendar_features(day.date)));
        targets.push_back(static_cast<double>(day.first_ready_ahead));
    }

    std::vector<bool> predicted_active(predictions.size(), false);
    for (const auto& [id, score] : select_top_decile(scores)) {
        predicted_active[static_cast<std::size_t>(id)] = true;
    }

    OneLevelMetrics metrics;
    int correct = 0, active = 0;
    double squared_error = 0.0;
    for (int i = n_train; i < n; ++i) {
        const ObservedDay& day = days[static_cast<std::size_t>(i)];
        const auto idx = static_cast<std::size_t>(i - n_train);
        if (predicted_active[idx] == day.active) ++correct;
        if (day.active) {
            ++active;
            const double err = predictions[idx] - day.ready_hour;
            squared_error += err * err;
        }
    }
    metrics.day_accuracy = static_cast<double>(correct) / static_cast<double>(n - n_train);
    metrics.hour_rmse =
        active > 0 ? std::sqrt(squared_error / static_cast<double>(active)) : 0.0;
    return metrics;
}

// ---------------------------------------------------------------------------

double ExperimentReport::arm_mean(const std::string& arm,
                                  double (*metric)(const RunReport&)) const {
    double sum = 0.0;
    int count = 0;
    for (const ExperimentRun& run : runs) {
        if (run.arm == arm) {
            sum += metric(run.report);
            ++count;
        }
    }
    if (count == 0) {
        raise(ErrorCode::internal_error, "no runs for arm '" + arm + "'");
    }
    return sum / count;
}

namespace {

struct Job {
    int experiment = 0;  // 0 = flexibility models, 2 = ideal/predicted, 3 = std/prob
    std::string arm;
    double param = 0.0;
    int shuffle = 0;
    PrequentialConfig config;
    const std::vector<DeviceTrace>* traces = nullptr;
    const MarketSeries* market = nullptr;
};

// Two-level metrics straight off a trace (no market interaction needed).
OneLevelMetrics trace_prediction_metrics(const std::vector<const DeviceTrace*>& traces) {
    OneLevelMetrics metrics;
    std::int64_t total = 0, correct = 0, active = 0;
    double squared_error = 0.0;
    for (const DeviceTrace* trace : traces) {
        for (const DayTrace& day : trace->test_days) {
            ++total;
            if (day.predicted_active == day.actual_active) ++correct;
            if (day.actual_active) {
                ++active;
                const double err = day.es_prediction - day.ready_hour;
                squared_error += err * err;
            }
        }
    }
    metrics.day_accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
    metrics.hour_rmse = active > 0 ? std::sqrt(squared_error / active) : 0.0;
    return metrics;
}

}  // namespace

ComparisonBundle run_comparisons(const ExperimentConfig& config) {
    const std::vector<SyntheticDeviceConfig> device_configs =
        config.devices.empty() ? builtin_synthetic_suite() : config.devices;
    if (config.n_shuffles < 1) {
        raise(ErrorCode::config_error, "need at least one market shuffle");
    }

    // Device data is fixed; only the market is randomized across repeats.
    std::vector<DeviceData> devices;
    for (std::size_t i = 0; i < device_configs.size(); ++i) {
        devices.push_back(device_data_from_config(
            device_configs[i], derive_seed(config.base_seed, 1000 + i),
            config.n_days, config.start_date));
    }

    const std::int64_t start_hour = days_from_civil(config.start_date) * 24;
    const MarketSeries base_market =
        config.market ? *config.market
                      : generate_synthetic_market(start_hour, config.n_days + 2,
                                                  derive_seed(config.base_seed, 7),
                                                  config.market_params);

    std::vector<MarketSeries> shuffled;
    shuffled.reserve(static_cast<std::size_t>(config.n_shuffles));
    for (int s = 0; s < config.n_shuffles; ++s) {
        shuffled.push_back(shuffle_market(
            base_market, derive_seed(config.base_seed, 100 + static_cast<std::uint64_t>(s))));
    }

    std::vector<DeviceTrace> default_traces, noisy_traces;
    for (const DeviceData& device : devices) {
        default_traces.push_back(
            build_device_trace(device, config.base_run.split, config.base_run.forecaster));
    }
    ForecasterConfig noisy_cfg = config.base_run.forecaster;
    noisy_cfg.noise_std = config.comparison_noise_std;
    for (const DeviceData& device : devices) {
        noisy_traces.push_back(build_device_trace(device, config.base_run.split, noisy_cfg));
    }

    // Assemble every run up front so parallel execution cannot change the
    // output order.
    std::vector<Job> jobs;
    for (int s = 0; s < config.n_shuffles; ++s) {
        const MarketSeries* market = &shuffled[static_cast<std::size_t>(s)];
        int arm_idx = 0;
        auto add_job = [&](int experiment, const std::string& arm, double param,
                           const PrequentialConfig& run_cfg,
                           const std::vector<DeviceTrace>* traces) {
            Job job;
            job.experiment = experiment;
            job.arm = arm;
            job.param = param;
            job.shuffle = s;
            job.config = run_cfg;
            job.config.seed = derive_seed(
                config.base_seed,
                10000 + static_cast<std::uint64_t>(s) * 1000 +
                    static_cast<std::uint64_t>(arm_idx));
            job.traces = traces;
            job.market = market;
            jobs.push_back(std::move(job));
            ++arm_idx;
        };

        // (a) uniform vs adaptive learning-rate grid.
        {
            PrequentialConfig run_cfg = config.base_run;
            run_cfg.offer_kind = OfferKind::probabilistic;
            run_cfg.adaptive_flex = false;
            add_job(0, "uniform", 0.0, run_cfg, &default_traces);
            for (double mu : config.mu_grid) {
                run_cfg.adaptive_flex = true;
                run_cfg.online_mu0 = mu;
                char arm[32];
                std::snprintf(arm, sizeof arm, "mu=%.2f", mu);
                add_job(0, arm, mu, run_cfg, &default_traces);
            }
        }
        // (c) ideal vs predicted start across manual flexibility.
        {
            PrequentialConfig run_cfg = config.base_run;
            run_cfg.offer_kind = OfferKind::manual;
            // Uniform acceptance weighting isolates the prediction effect.
            run_cfg.adaptive_flex = false;
            for (int flex_hours : config.flexibility_grid) {
                run_cfg.manual_flexibility = flex_hours;
                run_cfg.ideal_start = true;
                add_job(2, "ideal", flex_hours, run_cfg, &default_traces);
                run_cfg.ideal_start = false;
                add_job(2, "predicted", flex_hours, run_cfg, &default_traces);
            }
        }
        // (d) standard vs probabilistic offers under forecast noise.
        {
            PrequentialConfig run_cfg = config.base_run;
            run_cfg.adaptive_flex = true;
            run_cfg.forecaster = noisy_cfg;
            run_cfg.offer_kind = OfferKind::standard;
            add_job(3, "standard", config.comparison_noise_std, run_cfg, &noisy_traces);
            run_cfg.offer_kind = OfferKind::probabilistic;
            add_job(3, "probabilistic", config.comparison_noise_std, run_cfg, &noisy_traces);
        }
    }

    std::vector<RunReport> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    const auto n_jobs = static_cast<std::int64_t>(jobs.size());
#ifdef _OPENMP
    const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::int64_t i = 0; i < n_jobs; ++i) {
        const Job& job = jobs[static_cast<std::size_t>(i)];
        try {
            RunReport report = replay_run(*job.traces, *job.market, job.config);
            report.proposals.clear();  // experiment outputs keep aggregates only
            results[static_cast<std::size_t>(i)] = std::move(report);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!failures[i].empty()) {
            raise(ErrorCode::internal_error,
                  "experiment run '" + jobs[i].arm + "' failed: " + failures[i]);
        }
    }

    ComparisonBundle bundle;
    bundle.flexibility_models.name = "uniform_vs_adaptive";
    bundle.ideal_vs_predicted.name = "ideal_vs_predicted";
    bundle.standard_vs_probabilistic.name = "standard_vs_probabilistic";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        ExperimentRun run;
        run.arm = jobs[i].arm;
        run.param = jobs[i].param;
        run.shuffle = jobs[i].shuffle;
        run.report = std::move(results[i]);
        switch (jobs[i].experiment) {
            case 0: bundle.flexibility_models.runs.push_back(std::move(run)); break;
            case 2: bundle.ideal_vs_predicted.runs.push_back(std::move(run)); break;
            default: bundle.standard_vs_probabilistic.runs.push_back(std::move(run)); break;
        }
    }

    // (b) two-level vs one-level prediction quality.
    {
        std::vector<const DeviceTrace*> suite;
        for (const DeviceTrace& trace : default_traces) suite.push_back(&trace);
        const OneLevelMetrics suite_two = trace_prediction_metrics(suite);
        bundle.prediction_levels.push_back(
            {"two_level", "suite", 0, suite_two.day_accuracy, suite_two.hour_rmse});

        OneLevelMetrics suite_one{0.0, 0.0};
        for (const DeviceData& device : devices) {
            const OneLevelMetrics m = evaluate_one_level(
                observed_days(device.events, device.start_date, device.n_days),
                config.base_run.split);
            suite_one.day_accuracy += m.day_accuracy;
            suite_one.hour_rmse += m.hour_rmse;
        }
        suite_one.day_accuracy /= static_cast<double>(devices.size());
        suite_one.hour_rmse /= static_cast<double>(devices.size());
        bundle.prediction_levels.push_back(
            {"one_level", "suite", 0, suite_one.day_accuracy, suite_one.hour_rmse});

        const SyntheticDeviceConfig regular = regular_profile_device();
        for (int rep = 0; rep < config.n_shuffles; ++rep) {
            const DeviceData data = device_data_from_config(
                regular, derive_seed(config.base_seed, 2000 + static_cast<std::uint64_t>(rep)),
                config.n_days, config.start_date);
            const DeviceTrace trace =
                build_device_trace(data, config.base_run.split, config.base_run.forecaster);
            const OneLevelMetrics two = trace_prediction_metrics({&trace});
            bundle.prediction_levels.push_back(
                {"two_level", "regular", rep, two.day_accuracy, two.hour_rmse});
            const OneLevelMetrics one = evaluate_one_level(
                observed_days(data.events, data.start_date, data.n_days),
                config.base_run.split);
            bundle.prediction_levels.push_back(
                {"one_level", "regular", rep, one.day_accuracy, one.hour_rmse});
        }
    }

    return bundle;
}

}  // namespace flexsched
