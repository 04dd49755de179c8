// Command-line front end: ingestion, training, one-shot scheduling, and the
// simulation/experiment harness. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 internal invariant violation.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "flexsched/report.hpp"
#include "flexsched/rng.hpp"
#include "flexsched/serde.hpp"
#include "flexsched/simulation.hpp"

namespace {

using namespace flexsched;

bool g_verbose = false;

void note(const std::string& message) {
    if (g_verbose) std::cerr << "[flexsched] " << message << "\n";
}

int exit_code_for(ErrorCode code) {
    return code == ErrorCode::internal_error ? 3 : 2;
}

LoadCsv read_load_csv_file(const std::string& path, const std::string& device_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::io_error, "cannot open '" + path + "'");
    }
    return parse_load_csv(in, device_id);
}

MarketSeries read_market_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::io_error, "cannot open '" + path + "'");
    }
    return ingest_market_csv(in);
}

std::vector<SyntheticDeviceConfig> filtered_suite(const DatasetConfig& dataset) {
    std::vector<SyntheticDeviceConfig> suite = builtin_synthetic_suite();
    if (dataset.categories.empty()) return suite;
    std::vector<SyntheticDeviceConfig> out;
    for (const std::string& wanted : dataset.categories) {
        bool found = false;
        for (const SyntheticDeviceConfig& cfg : suite) {
            if (cfg.category == wanted) {
                out.push_back(cfg);
                found = true;
            }
        }
        if (!found) {
            raise(ErrorCode::config_error, "unknown synthetic category '" + wanted + "'");
        }
    }
    return out;
}

std::vector<DeviceData> build_devices(const DatasetConfig& dataset) {
    std::vector<DeviceData> devices;
    if (dataset.synthetic) {
        const auto configs = filtered_suite(dataset);
        for (std::size_t i = 0; i < configs.size(); ++i) {
            devices.push_back(device_data_from_config(
                configs[i], derive_seed(dataset.data_seed, 1000 + i), dataset.n_days,
                dataset.start_date));
        }
        return devices;
    }
    for (const auto& dev : dataset.csv_devices) {
        note("ingesting " + dev.path);
        const LoadCsv load = read_load_csv_file(dev.path, dev.device_id);
        DeviceData data;
        data.device_id = dev.device_id;
        data.events = extract_events(load, dataset.on_threshold, dataset.idle_gap);
        data.signature = extract_signature(data.events);
        data.true_lambda.fill(dev.true_lambda);
        const std::int64_t start_day = load.hourly.start_hour / 24;
        const std::int64_t end_hour =
            load.hourly.start_hour + static_cast<std::int64_t>(load.hourly.values.size());
        data.start_date = civil_from_days(start_day);
        data.n_days = static_cast<int>((end_hour - start_day * 24 + 23) / 24);
        devices.push_back(std::move(data));
    }
    return devices;
}

MarketSeries build_market(const MarketConfig& config,
                          const std::vector<DeviceData>& devices) {
    if (!config.csv_path.empty()) {
        return read_market_csv_file(config.csv_path);
    }
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (const DeviceData& d : devices) {
        const std::int64_t start = days_from_civil(d.start_date) * 24;
        const std::int64_t end = start + static_cast<std::int64_t>(d.n_days) * 24;
        if (first || start < lo) lo = start;
        if (first || end > hi) hi = end;
        first = false;
    }
    const int n_days = static_cast<int>((hi - lo) / 24) + 2;
    return generate_synthetic_market(lo, n_days, config.seed, config.params);
}

// --- subcommands -----------------------------------------------------------

int cmd_ingest(const std::string& kind, const std::string& in,
               const std::string& device, const std::string& out) {
    if (kind == "load") {
        const LoadCsv load = read_load_csv_file(in, device.empty() ? in : device);
        write_json_file(load_series_to_json(load.hourly), out);
        std::cout << "ingested " << load.hourly.values.size() << " hours ("
                  << load.hourly.gap_hours.size() << " gap-filled) -> " << out << "\n";
        return 0;
    }
    if (kind == "market") {
        const MarketSeries market = read_market_csv_file(in);
        write_json_file(market_to_json(market), out);
        std::cout << "ingested " << market.size() << " market hours";
        if (!market.negative_price_hours.empty()) {
            std::cout << " (warning: " << market.negative_price_hours.size()
                      << " hours with negative prices)";
        }
        std::cout << " -> " << out << "\n";
        return 0;
    }
    raise(ErrorCode::config_error, "--kind must be 'load' or 'market'");
}

int cmd_signature(const std::string& in, const std::string& device,
                  double threshold, int idle_gap, const std::string& out) {
    EventSeries events;
    if (in.size() > 5 && in.substr(in.size() - 5) == ".json") {
        const Json j = read_json_file(in);
        const std::string kind = j.value("kind", "");
        if (kind == "event_series") {
            events = event_series_from_json(j);
        } else if (kind == "load_series") {
            events = extract_events(load_series_from_json(j), threshold, idle_gap);
        } else {
            raise(ErrorCode::parse_error, "'" + in + "' is neither a load nor an event store");
        }
    } else {
        const LoadCsv load = read_load_csv_file(in, device.empty() ? in : device);
        events = extract_events(load, threshold, idle_gap);
    }
    const DeviceSignature sig = extract_signature(events);
    write_json_file(signature_to_json(sig), out);
    std::cout << "signature length " << sig.length() << " h from "
              << events.events.size() << " operations -> " << out << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out) {
    const Json j = read_json_file(config_path);
    const std::string csv = j.at("load_csv").get<std::string>();
    const std::string device_id = j.value("device_id", csv);
    const double threshold = j.value("threshold", 0.05);
    const int idle_gap = j.value("idle_gap", 1);

    const LoadCsv load = read_load_csv_file(csv, device_id);
    const EventSeries events = extract_events(load, threshold, idle_gap);
    if (events.events.size() < 2) {
        raise(ErrorCode::insufficient_data, "need at least 2 operations to train");
    }

    ModelBundle bundle;
    bundle.device_id = device_id;
    bundle.signature = extract_signature(events);
    bundle.forecaster_config.alpha = j.value("alpha", 1.0);
    bundle.forecaster_config.std_floor = j.value("std_floor", 0.5);
    bundle.forecaster_config.halfwidth_sigmas = j.value("halfwidth_sigmas", 1.5);
    bundle.forecaster_config.window_days = j.value("window_days", 0);

    const std::int64_t start_day = load.hourly.start_hour / 24;
    const std::int64_t end_hour =
        load.hourly.start_hour + static_cast<std::int64_t>(load.hourly.values.size());
    const int n_days = static_cast<int>((end_hour - start_day * 24 + 23) / 24);
    const auto days = observed_days(events, civil_from_days(start_day), n_days);

    ActivityForecaster forecaster(bundle.forecaster_config, bundle.signature.length());
    forecaster.fit(days);
    bundle.day_model = forecaster.day_model();
    bundle.es_model = forecaster.es_model();
    bundle.le_model = forecaster.le_model();
    bundle.training_days = n_days;

    OfflineFitConfig offline;
    offline.mu0 = j.value("offline_mu0", offline.mu0);
    offline.epochs = j.value("offline_epochs", offline.epochs);
    offline.online_mu0 = j.value("mu0", offline.online_mu0);
    bundle.flex = fit_offline(events, offline);

    write_json_file(model_bundle_to_json(bundle), out);
    std::cout << "trained on " << n_days << " days, " << events.events.size()
              << " operations -> " << out << "\n";
    return 0;
}

int cmd_schedule(const std::string& config_path, const std::string& device,
                 const std::string& date_text, const std::string& out,
                 std::uint64_t seed, int threads) {
    (void)seed;
    const Json j = read_json_file(config_path);
    const ModelBundle bundle = model_bundle_from_json(read_json_file(j.at("model").get<std::string>()));
    MarketSeries market;
    if (j.contains("market_csv")) {
        market = read_market_csv_file(j.at("market_csv").get<std::string>());
    } else if (j.contains("market_store")) {
        market = market_from_json(read_json_file(j.at("market_store").get<std::string>()));
    } else {
        raise(ErrorCode::config_error, "schedule config needs 'market_csv' or 'market_store'");
    }

    const CivilDate date = parse_date(date_text);
    const std::string device_id = device.empty() ? bundle.device_id : device;

    Json result;
    result["kind"] = "schedule_result";
    result["device_id"] = device_id;
    result["date"] = format_date(date);

    const CalendarFeatures features = calendar_features(date);
    const double p_day = bundle.day_model.predict(features);
    result["day_probability"] = round9(p_day);

    ForecastOptions opts;
    opts.std_floor = bundle.forecaster_config.std_floor;
    opts.halfwidth_sigmas = bundle.forecaster_config.halfwidth_sigmas;
    opts.noise_std = bundle.forecaster_config.noise_std;
    const auto forecast =
        forecast_activity(bundle.day_model, bundle.es_model, bundle.le_model, features,
                          bundle.signature.length(), opts);
    if (!forecast) {
        result["proposal"] = nullptr;
        result["reason"] = "no predicted activation";
        write_json_file(result, out);
        std::cout << "no predicted activation for " << device_id << " on "
                  << format_date(date) << "\n";
        return 0;
    }

    const ProbabilisticFlexOffer pfo =
        make_probabilistic_flexoffer(*forecast, bundle.signature);
    SchedulerContext ctx;
    ctx.market = &market;
    ctx.flex = &bundle.flex;
    ctx.context = ContextKey::from_date(date);
    ctx.day_offset_hours = days_from_civil(date) * 24;
    ctx.threads = threads;
    const ScheduleProposal proposal = schedule(pfo, ctx, device_id);

    result["flex_offer"] = pfo_to_json(pfo);
    result["proposal"] = proposal_to_json(proposal);
    result["chosen_time"] = format_timestamp_hour(ctx.day_offset_hours + proposal.chosen_t);
    write_json_file(result, out);
    std::cout << "scheduled " << device_id << " at hour " << proposal.chosen_t
              << " (expected utility " << format_number(proposal.expected_utility)
              << ") -> " << out << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out, int threads) {
    SimulateConfig config = simulate_config_from_json(read_json_file(config_path));
    config.run.seed = seed;
    config.run.scheduler_threads = threads;
    const std::vector<DeviceData> devices = build_devices(config.dataset);
    note("running prequential evaluation over " + std::to_string(devices.size()) +
         " devices");
    const MarketSeries market = build_market(config.market, devices);
    const RunReport report = run_prequential(devices, market, config.run);
    write_report(report, out);
    std::cout << "simulate: " << report.n_proposals << " proposals, acceptance "
              << format_number(report.acceptance_rate) << ", spot savings "
              << format_number(report.spot_savings_pct) << "% -> " << out
              << ".json/.csv\n";
    return 0;
}

int cmd_compare(const std::string& config_path, std::uint64_t seed,
                const std::string& out, int threads) {
    CompareConfig config = compare_config_from_json(read_json_file(config_path));
    config.experiment.devices = filtered_suite(config.dataset);
    config.experiment.base_seed = seed;
    if (threads > 0) config.experiment.threads = threads;
    if (!config.market.csv_path.empty()) {
        config.experiment.market = read_market_csv_file(config.market.csv_path);
    } else {
        const std::int64_t start_hour = days_from_civil(config.dataset.start_date) * 24;
        config.experiment.market = generate_synthetic_market(
            start_hour, config.dataset.n_days + 2, config.market.seed,
            config.market.params);
    }
    note("running comparison experiments");
    const ComparisonBundle bundle = run_comparisons(config.experiment);
    write_comparison_bundle(bundle, out);
    std::cout << "compare: wrote experiment reports to " << out << "/\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead scheduling of flexible residential devices"};
    app.require_subcommand(1);

    std::string in_path, out_path, config_path, device, date, kind;
    double threshold = 0.05;
    int idle_gap = 1;
    std::uint64_t seed = 42;
    int threads = 0;

    CLI::App* ingest = app.add_subcommand("ingest", "Validate and store a load or market CSV");
    ingest->add_option("--kind", kind, "Input kind: load or market")->required();
    ingest->add_option("--in", in_path, "Input CSV path")->required();
    ingest->add_option("--device", device, "Device id for load data");
    ingest->add_option("--out", out_path, "Output JSON store")->required();
    ingest->add_flag("--verbose", g_verbose, "Progress output on stderr");

    CLI::App* signature = app.add_subcommand("signature", "Extract a device signature");
    signature->add_option("--in", in_path, "Load CSV, load store, or event store")->required();
    signature->add_option("--device", device, "Device id");
    signature->add_option("--threshold", threshold, "Operation-on threshold in kWh");
    signature->add_option("--idle-gap", idle_gap, "Idle hours required before a new operation");
    signature->add_option("--out", out_path, "Output signature JSON")->required();
    signature->add_flag("--verbose", g_verbose, "Progress output on stderr");

    CLI::App* train = app.add_subcommand("train", "Fit forecast and user-flexibility models");
    train->add_option("--config", config_path, "Training config JSON")->required();
    train->add_option("--out", out_path, "Output model JSON")->required();
    train->add_flag("--verbose", g_verbose, "Progress output on stderr");

    CLI::App* schedule = app.add_subcommand("schedule", "One-shot day-ahead proposal");
    schedule->add_option("--config", config_path, "Schedule config JSON")->required();
    schedule->add_option("--device", device, "Device id (defaults to the model's)");
    schedule->add_option("--date", date, "Target date YYYY-MM-DD")->required();
    schedule->add_option("--seed", seed, "Random seed (unused, accepted for symmetry)");
    schedule->add_option("--threads", threads, "Scheduler threads (0 = serial)");
    schedule->add_option("--out", out_path, "Output proposal JSON")->required();
    schedule->add_flag("--verbose", g_verbose, "Progress output on stderr");

    CLI::App* simulate = app.add_subcommand("simulate", "Prequential evaluation run");
    simulate->add_option("--config", config_path, "Simulation config JSON")->required();
    simulate->add_option("--seed", seed, "Run seed (default 42)");
    simulate->add_option("--threads", threads, "Scheduler threads (0 = serial)");
    simulate->add_option("--out", out_path, "Output report stem")->required();
    simulate->add_flag("--verbose", g_verbose, "Progress output on stderr");

    CLI::App* compare = app.add_subcommand("compare", "Run the comparison experiments");
    compare->add_option("--config", config_path, "Experiment config JSON")->required();
    compare->add_option("--seed", seed, "Base seed (default 42)");
    compare->add_option("--threads", threads, "Parallel experiment runs (0 = all cores)");
    compare->add_option("--out", out_path, "Output directory")->required();
    compare->add_flag("--verbose", g_verbose, "Progress output on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "error_code=usage_error\n";
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(kind, in_path, device, out_path);
        if (signature->parsed())
            return cmd_signature(in_path, device, threshold, idle_gap, out_path);
        if (train->parsed()) return cmd_train(config_path, out_path);
        if (schedule->parsed())
            return cmd_schedule(config_path, device, date, out_path, seed, threads);
        if (simulate->parsed()) return cmd_simulate(config_path, seed, out_path, threads);
        if (compare->parsed()) return cmd_compare(config_path, seed, out_path, threads);
    } catch (const flexsched::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "error_code=" << flexsched::error_code_name(e.code()) << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "error_code=internal_error\n";
        return 3;
    }
    return 0;
}
