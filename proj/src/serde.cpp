#include "flexsched/serde.hpp"

#include <cstdio>
#include <fstream>

namespace flexsched {

double round9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return std::strtod(buf, nullptr);
}

namespace {

Json dist_to_json(const ForecastDistribution& dist) {
    Json j;
    j["support"] = dist.support;
    Json pmf = Json::array();
    for (double p : dist.pmf) pmf.push_back(round9(p));
    j["pmf"] = pmf;
    return j;
}

ForecastDistribution dist_from_json(const Json& j) {
    ForecastDistribution dist;
    dist.support = j.at("support").get<std::vector<int>>();
    dist.pmf = j.at("pmf").get<std::vector<double>>();
    // Serialization rounds probabilities; absorb the residual into a
    // renormalization before validating.
    double sum = 0.0;
    for (double p : dist.pmf) sum += p;
    if (sum > 0.0) {
        for (double& p : dist.pmf) p /= sum;
    }
    dist.validate();
    return dist;
}

Json profile_to_json(const std::vector<ProfileSlice>& profile) {
    Json arr = Json::array();
    for (const ProfileSlice& s : profile) {
        arr.push_back({{"e_min", round9(s.e_min)}, {"e_max", round9(s.e_max)}});
    }
    return arr;
}

std::vector<ProfileSlice> profile_from_json(const Json& j) {
    std::vector<ProfileSlice> profile;
    for (const Json& s : j) {
        profile.push_back({s.at("e_min").get<double>(), s.at("e_max").get<double>()});
    }
    return profile;
}

Json hour_model_to_json(const HourModel& m) {
    Json j;
    j["kind"] = "linear_regression";
    j["intercept"] = m.intercept;
    j["weights"] = m.weights;
    j["residual_std"] = m.residual_std;
    j["n_training"] = m.n_training;
    j["intercept_only"] = m.intercept_only;
    j["rank_deficient"] = m.rank_deficient;
    return j;
}

HourModel hour_model_from_json(const Json& j) {
    HourModel m;
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.residual_std = j.at("residual_std").get<double>();
    m.n_training = j.at("n_training").get<std::size_t>();
    m.intercept_only = j.at("intercept_only").get<bool>();
    m.rank_deficient = j.at("rank_deficient").get<bool>();
    return m;
}

Json day_model_to_json(const DayModel& m) {
    Json j;
    j["kind"] = "naive_bayes";
    j["alpha"] = m.alpha();
    j["class_counts"] = {m.class_count(false), m.class_count(true)};
    Json tables = Json::array();
    for (int f = 0; f < DayModel::kFeatureCount; ++f) {
        Json per_class = Json::array();
        for (int cls = 0; cls < 2; ++cls) {
            Json row = Json::array();
            for (int c = 0; c < DayModel::feature_cardinality(f); ++c) {
                row.push_back(m.table_count(f, cls == 1, c));
            }
            per_class.push_back(row);
        }
        tables.push_back(per_class);
    }
    j["tables"] = tables;
    return j;
}

DayModel day_model_from_json(const Json& j) {
    DayModel m(j.at("alpha").get<double>());
    m.set_class_count(false, j.at("class_counts")[0].get<double>());
    m.set_class_count(true, j.at("class_counts")[1].get<double>());
    const Json& tables = j.at("tables");
    for (int f = 0; f < DayModel::kFeatureCount; ++f) {
        for (int cls = 0; cls < 2; ++cls) {
            const Json& row = tables[static_cast<std::size_t>(f)][static_cast<std::size_t>(cls)];
            for (int c = 0; c < DayModel::feature_cardinality(f); ++c) {
                m.set_table_count(f, cls == 1, c, row[static_cast<std::size_t>(c)].get<double>());
            }
        }
    }
    return m;
}

Json flex_to_json(const UserFlexModel& flex) {
    Json j;
    j["kind"] = flex.is_uniform() ? "uniform" : "exponential_survival";
    j["mu0"] = flex.mu0();
    Json buckets = Json::array();
    for (int i = 0; i < ContextKey::kBucketCount; ++i) {
        const ContextKey key = ContextKey::from_index(i);
        const FlexBucket& b = flex.bucket(key);
        buckets.push_back({{"weekday_class", key.weekend ? "weekend" : "weekday"},
                           {"season", season_name(key.season)},
                           {"lambda", round9(b.lambda)},
                           {"mu0", flex.mu0()},
                           {"n", b.n}});
    }
    j["buckets"] = buckets;
    return j;
}

Season season_from_name(const std::string& name) {
    for (int s = 0; s < 4; ++s) {
        if (name == season_name(static_cast<Season>(s))) return static_cast<Season>(s);
    }
    raise(ErrorCode::parse_error, "unknown season '" + name + "'");
}

UserFlexModel flex_from_json(const Json& j) {
    if (j.at("kind").get<std::string>() == "uniform") {
        return UserFlexModel::uniform();
    }
    UserFlexModel flex(j.at("mu0").get<double>());
    for (const Json& b : j.at("buckets")) {
        ContextKey key;
        key.weekend = b.at("weekday_class").get<std::string>() == "weekend";
        key.season = season_from_name(b.at("season").get<std::string>());
        FlexBucket bucket;
        bucket.lambda = b.at("lambda").get<double>();
        bucket.n = b.at("n").get<std::uint64_t>();
        flex.set_bucket(key, bucket);
    }
    return flex;
}

}  // namespace

Json load_series_to_json(const LoadSeries& series) {
    Json j;
    j["kind"] = "load_series";
    j["device_id"] = series.device_id;
    j["start"] = format_timestamp_hour(series.start_hour);
    Json values = Json::array();
    for (double v : series.values) values.push_back(round9(v));
    j["values"] = values;
    j["gap_hours"] = series.gap_hours;
    return j;
}

LoadSeries load_series_from_json(const Json& j) {
    LoadSeries series;
    series.device_id = j.at("device_id").get<std::string>();
    series.start_hour = parse_timestamp(j.at("start").get<std::string>()).hour();
    series.values = j.at("values").get<std::vector<double>>();
    series.gap_hours = j.at("gap_hours").get<std::vector<std::size_t>>();
    return series;
}

Json event_series_to_json(const EventSeries& events) {
    Json j;
    j["kind"] = "event_series";
    j["device_id"] = events.device_id;
    Json list = Json::array();
    for (const OperationEvent& ev : events.events) {
        Json e;
        e["ready"] = format_timestamp_hour(ev.ready_hour);
        e["duration_hours"] = ev.duration_hours;
        e["duration_exact"] = round9(ev.duration_exact);
        Json energy = Json::array();
        for (double v : ev.energy_per_hour) energy.push_back(round9(v));
        e["energy_per_hour"] = energy;
        list.push_back(e);
    }
    j["events"] = list;
    return j;
}

EventSeries event_series_from_json(const Json& j) {
    EventSeries events;
    events.device_id = j.at("device_id").get<std::string>();
    for (const Json& e : j.at("events")) {
        OperationEvent ev;
        ev.ready_hour = parse_timestamp(e.at("ready").get<std::string>()).hour();
        ev.duration_hours = e.at("duration_hours").get<int>();
        ev.duration_exact = e.at("duration_exact").get<double>();
        ev.energy_per_hour = e.at("energy_per_hour").get<std::vector<double>>();
        events.events.push_back(std::move(ev));
    }
    return events;
}

Json signature_to_json(const DeviceSignature& sig) {
    Json j;
    j["kind"] = "device_signature";
    Json demand = Json::array();
    for (double e : sig.per_hour_demand) demand.push_back(round9(e));
    j["per_hour_demand"] = demand;
    j["length"] = sig.length();
    return j;
}

DeviceSignature signature_from_json(const Json& j) {
    DeviceSignature sig;
    sig.per_hour_demand = j.at("per_hour_demand").get<std::vector<double>>();
    return sig;
}

Json market_to_json(const MarketSeries& market) {
    Json j;
    j["kind"] = "market_series";
    j["start"] = format_timestamp_hour(market.start_hour);
    Json spot = Json::array(), up = Json::array(), down = Json::array(), vol = Json::array();
    for (const MarketRecord& r : market.records) {
        spot.push_back(round9(r.spot));
        up.push_back(round9(r.up_price));
        down.push_back(round9(r.down_price));
        vol.push_back(round9(r.reg_volume));
    }
    j["spot"] = spot;
    j["up_price"] = up;
    j["down_price"] = down;
    j["reg_volume"] = vol;
    j["negative_price_hours"] = market.negative_price_hours;
    return j;
}

MarketSeries market_from_json(const Json& j) {
    MarketSeries market;
    market.start_hour = parse_timestamp(j.at("start").get<std::string>()).hour();
    const auto spot = j.at("spot").get<std::vector<double>>();
    const auto up = j.at("up_price").get<std::vector<double>>();
    const auto down = j.at("down_price").get<std::vector<double>>();
    const auto vol = j.at("reg_volume").get<std::vector<double>>();
    if (spot.size() != up.size() || spot.size() != down.size() || spot.size() != vol.size()) {
        raise(ErrorCode::parse_error, "market arrays have mismatched lengths");
    }
    for (std::size_t i = 0; i < spot.size(); ++i) {
        market.records.push_back({spot[i], up[i], down[i], vol[i]});
    }
    market.negative_price_hours =
        j.at("negative_price_hours").get<std::vector<std::size_t>>();
    return market;
}

Json flexoffer_to_json(const FlexOffer& offer) {
    Json j;
    j["t_es"] = offer.t_es;
    j["t_ls"] = offer.t_ls;
    j["profile"] = profile_to_json(offer.profile);
    return j;
}

FlexOffer flexoffer_from_json(const Json& j) {
    FlexOffer offer;
    offer.t_es = j.at("t_es").get<int>();
    offer.t_ls = j.at("t_ls").get<int>();
    offer.profile = profile_from_json(j.at("profile"));
    return offer;
}

Json pfo_to_json(const ProbabilisticFlexOffer& pfo) {
    Json j;
    j["t_es_dist"] = dist_to_json(pfo.t_es_dist);
    Json cond = Json::array();
    for (const auto& [t_es, dist] : pfo.t_le_conditional) {
        Json c;
        c["t_es"] = t_es;
        c["dist"] = dist_to_json(dist);
        cond.push_back(c);
    }
    j["t_le_conditional"] = cond;
    j["profile"] = profile_to_json(pfo.profile);
    return j;
}

ProbabilisticFlexOffer pfo_from_json(const Json& j) {
    ProbabilisticFlexOffer pfo;
    pfo.t_es_dist = dist_from_json(j.at("t_es_dist"));
    for (const Json& c : j.at("t_le_conditional")) {
        pfo.t_le_conditional.emplace_back(c.at("t_es").get<int>(),
                                          dist_from_json(c.at("dist")));
    }
    pfo.profile = profile_from_json(j.at("profile"));
    return pfo;
}

Json proposal_to_json(const ScheduleProposal& proposal) {
    Json j;
    j["device_id"] = proposal.device_id;
    j["chosen_t"] = proposal.chosen_t;
    j["reference_t_es"] = proposal.reference_t_es;
    j["expected_utility"] = round9(proposal.expected_utility);
    j["savings"] = {{"delta_spot", round9(proposal.savings.delta_spot)},
                    {"delta_reg", round9(proposal.savings.delta_reg)}};
    Json candidates = Json::array();
    for (const CandidateEvaluation& c : proposal.candidates) {
        Json jc;
        jc["t"] = c.t;
        jc["expected_utility"] = round9(c.expected_utility);
        Json per_interval = Json::array();
        for (const IntervalContribution& ic : c.per_interval) {
            per_interval.push_back({{"t_es", ic.interval.t_es},
                                    {"t_ls", ic.interval.t_ls},
                                    {"probability", round9(ic.interval.probability)},
                                    {"delta_spot", round9(ic.delta_spot)},
                                    {"delta_reg", round9(ic.delta_reg)},
                                    {"acceptance_prob", round9(ic.acceptance_prob)},
                                    {"contribution", round9(ic.contribution)}});
        }
        jc["per_interval"] = per_interval;
        candidates.push_back(jc);
    }
    j["candidates"] = candidates;
    return j;
}

Json model_bundle_to_json(const ModelBundle& bundle) {
    Json j;
    j["kind"] = "model_bundle";
    j["device_id"] = bundle.device_id;
    j["signature"] = signature_to_json(bundle.signature);
    j["forecaster"] = {{"alpha", bundle.forecaster_config.alpha},
                       {"std_floor", bundle.forecaster_config.std_floor},
                       {"halfwidth_sigmas", bundle.forecaster_config.halfwidth_sigmas},
                       {"noise_std", bundle.forecaster_config.noise_std},
                       {"window_days", bundle.forecaster_config.window_days}};
    j["day_model"] = day_model_to_json(bundle.day_model);
    j["es_model"] = hour_model_to_json(bundle.es_model);
    j["le_model"] = hour_model_to_json(bundle.le_model);
    j["user_flex"] = flex_to_json(bundle.flex);
    j["training_days"] = bundle.training_days;
    return j;
}

ModelBundle model_bundle_from_json(const Json& j) {
    if (j.value("kind", "") != "model_bundle") {
        raise(ErrorCode::parse_error, "not a model bundle document");
    }
    ModelBundle bundle;
    bundle.device_id = j.at("device_id").get<std::string>();
    bundle.signature = signature_from_json(j.at("signature"));
    const Json& fc = j.at("forecaster");
    bundle.forecaster_config.alpha = fc.at("alpha").get<double>();
    bundle.forecaster_config.std_floor = fc.at("std_floor").get<double>();
    bundle.forecaster_config.halfwidth_sigmas = fc.at("halfwidth_sigmas").get<double>();
    bundle.forecaster_config.noise_std = fc.at("noise_std").get<double>();
    bundle.forecaster_config.window_days = fc.at("window_days").get<int>();
    bundle.day_model = day_model_from_json(j.at("day_model"));
    bundle.es_model = hour_model_from_json(j.at("es_model"));
    bundle.le_model = hour_model_from_json(j.at("le_model"));
    bundle.flex = flex_from_json(j.at("user_flex"));
    bundle.training_days = j.at("training_days").get<std::int64_t>();
    return bundle;
}

Json run_report_to_json(const RunReport& report) {
    Json j;
    j["kind"] = "run_report";
    j["acceptance_rate"] = round9(report.acceptance_rate);
    j["spot_savings_pct"] = round9(report.spot_savings_pct);
    j["reg_savings_pct"] = round9(report.reg_savings_pct);
    j["day_accuracy"] = round9(report.day_accuracy);
    j["hour_rmse"] = round9(report.hour_rmse);
    j["n_proposals"] = report.n_proposals;
    j["n_accepted"] = report.n_accepted;
    j["n_rejected"] = report.n_rejected;
    j["n_test_days"] = report.n_test_days;
    j["n_feedback"] = report.n_feedback;
    j["total_spot_savings"] = round9(report.total_spot_savings);
    j["total_reg_savings"] = round9(report.total_reg_savings);
    j["baseline_spot_cost"] = round9(report.baseline_spot_cost);
    j["baseline_reg_cost"] = round9(report.baseline_reg_cost);
    j["mean_lambda"] = round9(report.mean_lambda);
    j["seeds"] = report.seeds;
    j["config_digest"] = report.config_digest;
    return j;
}

namespace {

void apply_run_json(const Json& j, PrequentialConfig& run) {
    run.split = j.value("split", run.split);
    if (j.contains("oracle")) {
        run.oracle_mode = oracle_mode_from_name(j.at("oracle").get<std::string>());
    }
    run.adaptive_flex = j.value("adaptive", run.adaptive_flex);
    run.online_mu0 = j.value("mu0", run.online_mu0);
    run.offline_fit.mu0 = j.value("offline_mu0", run.offline_fit.mu0);
    run.offline_fit.epochs = j.value("offline_epochs", run.offline_fit.epochs);
    run.forecaster.alpha = j.value("alpha", run.forecaster.alpha);
    run.forecaster.std_floor = j.value("std_floor", run.forecaster.std_floor);
    run.forecaster.halfwidth_sigmas =
        j.value("halfwidth_sigmas", run.forecaster.halfwidth_sigmas);
    run.forecaster.noise_std = j.value("noise_std", run.forecaster.noise_std);
    run.forecaster.window_days = j.value("window_days", run.forecaster.window_days);
    if (j.contains("reset")) {
        const std::string reset = j.at("reset").get<std::string>();
        if (reset == "none") run.reset = ResetPolicy::none;
        else if (reset == "monthly") run.reset = ResetPolicy::monthly;
        else if (reset == "seasonal") run.reset = ResetPolicy::seasonal;
        else raise(ErrorCode::config_error, "unknown reset policy '" + reset + "'");
    }
    if (j.contains("offer")) {
        const std::string offer = j.at("offer").get<std::string>();
        if (offer == "probabilistic") run.offer_kind = OfferKind::probabilistic;
        else if (offer == "standard") run.offer_kind = OfferKind::standard;
        else if (offer == "manual") run.offer_kind = OfferKind::manual;
        else raise(ErrorCode::config_error, "unknown offer kind '" + offer + "'");
    }
    run.manual_flexibility = j.value("manual_flexibility", run.manual_flexibility);
    run.ideal_start = j.value("ideal_start", run.ideal_start);
    run.market_options.skip_first_reg_hour =
        j.value("skip_first_reg_hour", run.market_options.skip_first_reg_hour);
    run.scheduler_threads = j.value("scheduler_threads", run.scheduler_threads);
}

DatasetConfig dataset_from_json(const Json& j) {
    DatasetConfig dataset;
    if (j.contains("synthetic")) {
        const Json& s = j.at("synthetic");
        dataset.synthetic = true;
        if (s.contains("categories") && s.at("categories").is_array()) {
            dataset.categories = s.at("categories").get<std::vector<std::string>>();
        }
        dataset.n_days = s.value("n_days", dataset.n_days);
        if (s.contains("start_date")) {
            dataset.start_date = parse_date(s.at("start_date").get<std::string>());
        }
        dataset.data_seed = s.value("data_seed", dataset.data_seed);
    } else if (j.contains("load_csvs")) {
        dataset.synthetic = false;
        for (const Json& d : j.at("load_csvs")) {
            DatasetConfig::CsvDevice dev;
            dev.path = d.at("path").get<std::string>();
            dev.device_id = d.value("device_id", dev.path);
            dev.true_lambda = d.value("true_lambda", dev.true_lambda);
            dataset.csv_devices.push_back(dev);
        }
        dataset.on_threshold = j.value("threshold", dataset.on_threshold);
        dataset.idle_gap = j.value("idle_gap", dataset.idle_gap);
    } else {
        raise(ErrorCode::config_error,
              "dataset must specify either 'synthetic' or 'load_csvs'");
    }
    return dataset;
}

MarketConfig market_from_config_json(const Json& j) {
    MarketConfig market;
    if (j.contains("csv")) {
        market.csv_path = j.at("csv").get<std::string>();
    } else if (j.contains("synthetic")) {
        const Json& s = j.at("synthetic");
        market.seed = s.value("seed", market.seed);
        market.params.base_price = s.value("base_price", market.params.base_price);
        market.params.noise_std = s.value("noise_std", market.params.noise_std);
        market.params.up_spread = s.value("up_spread", market.params.up_spread);
        market.params.down_spread = s.value("down_spread", market.params.down_spread);
        market.params.p_up = s.value("p_up", market.params.p_up);
        market.params.p_down = s.value("p_down", market.params.p_down);
        market.params.volume_scale = s.value("volume_scale", market.params.volume_scale);
    }
    return market;
}

}  // namespace

SimulateConfig simulate_config_from_json(const Json& j) {
    SimulateConfig config;
    config.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("market")) config.market = market_from_config_json(j.at("market"));
    if (j.contains("run")) apply_run_json(j.at("run"), config.run);
    return config;
}

CompareConfig compare_config_from_json(const Json& j) {
    CompareConfig config;
    config.dataset = dataset_from_json(j.at("dataset"));
    if (!config.dataset.synthetic) {
        raise(ErrorCode::config_error, "compare requires a synthetic dataset");
    }
    if (j.contains("market")) config.market = market_from_config_json(j.at("market"));
    config.experiment.n_days = config.dataset.n_days;
    config.experiment.start_date = config.dataset.start_date;
    config.experiment.n_shuffles = j.value("n_shuffles", config.experiment.n_shuffles);
    if (j.contains("mu_grid")) {
        config.experiment.mu_grid = j.at("mu_grid").get<std::vector<double>>();
    }
    if (j.contains("flexibility_grid")) {
        config.experiment.flexibility_grid =
            j.at("flexibility_grid").get<std::vector<int>>();
    }
    config.experiment.comparison_noise_std =
        j.value("noise_std", config.experiment.comparison_noise_std);
    config.experiment.threads = j.value("threads", config.experiment.threads);
    if (j.contains("run")) apply_run_json(j.at("run"), config.experiment.base_run);
    return config;
}

Json synthetic_device_to_json(const SyntheticDeviceConfig& config) {
    Json j;
    j["category"] = config.category;
    j["device_id"] = config.device_id;
    j["weekday_activation"] = config.weekday_activation;
    Json mixture = Json::array();
    for (const MixtureComponent& c : config.ready_hour_mixture) {
        mixture.push_back({{"weight", c.weight},
                           {"mean_hour", c.mean_hour},
                           {"std_hours", c.std_hours}});
    }
    j["ready_hour_mixture"] = mixture;
    j["true_lambda"] = config.true_lambda;
    j["signature"] = signature_to_json(config.signature);
    j["jitter_minus"] = config.jitter_minus;
    j["jitter_plus"] = config.jitter_plus;
    return j;
}

SyntheticDeviceConfig synthetic_device_from_json(const Json& j) {
    SyntheticDeviceConfig config;
    config.category = j.at("category").get<std::string>();
    config.device_id = j.at("device_id").get<std::string>();
    const auto act = j.at("weekday_activation").get<std::vector<double>>();
    if (act.size() != 7) {
        raise(ErrorCode::config_error, "weekday_activation needs 7 entries");
    }
    std::copy(act.begin(), act.end(), config.weekday_activation.begin());
    for (const Json& c : j.at("ready_hour_mixture")) {
        config.ready_hour_mixture.push_back({c.at("weight").get<double>(),
                                             c.at("mean_hour").get<double>(),
                                             c.at("std_hours").get<double>()});
    }
    const auto rates = j.at("true_lambda").get<std::vector<double>>();
    if (rates.size() != ContextKey::kBucketCount) {
        raise(ErrorCode::config_error, "true_lambda needs 8 entries");
    }
    std::copy(rates.begin(), rates.end(), config.true_lambda.begin());
    config.signature = signature_from_json(j.at("signature"));
    config.jitter_minus = j.value("jitter_minus", 0.0);
    config.jitter_plus = j.value("jitter_plus", 0.0);
    return config;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::io_error, "cannot open '" + path + "'");
    }
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        raise(ErrorCode::parse_error, "bad JSON in '" + path + "': " + e.what());
    }
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::io_error, "cannot write '" + path + "'");
    }
    out << j.dump(2) << "\n";
    if (!out) {
        raise(ErrorCode::io_error, "write failed for '" + path + "'");
    }
}

}  // namespace flexsched
