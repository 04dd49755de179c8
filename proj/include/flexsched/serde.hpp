#ifndef FLEXSCHED_SERDE_HPP
#define FLEXSCHED_SERDE_HPP

#include <json.hpp>
#include <string>

#include "flexsched/forecast.hpp"
#include "flexsched/market.hpp"
#include "flexsched/scheduler.hpp"
#include "flexsched/simulation.hpp"
#include "flexsched/userflex.hpp"

namespace flexsched {

// Insertion-ordered JSON keeps report bytes stable across runs.
using Json = nlohmann::ordered_json;

// Round to 9 significant digits; report floats pass through this so that
// serialized output is byte-reproducible.
double round9(double value);

Json load_series_to_json(const LoadSeries& series);
LoadSeries load_series_from_json(const Json& j);

Json event_series_to_json(const EventSeries& events);
EventSeries event_series_from_json(const Json& j);

Json signature_to_json(const DeviceSignature& sig);
DeviceSignature signature_from_json(const Json& j);

Json market_to_json(const MarketSeries& market);
MarketSeries market_from_json(const Json& j);

Json flexoffer_to_json(const FlexOffer& offer);
FlexOffer flexoffer_from_json(const Json& j);

Json pfo_to_json(const ProbabilisticFlexOffer& pfo);
ProbabilisticFlexOffer pfo_from_json(const Json& j);

Json proposal_to_json(const ScheduleProposal& proposal);

// Trained models for one device: forecaster state plus the user-flexibility
// model, enough to forecast and schedule (not to resume training history).
struct ModelBundle {
    std::string device_id;
    DeviceSignature signature;
    ForecasterConfig forecaster_config;
    DayModel day_model{1.0};
    HourModel es_model;
    HourModel le_model;
    UserFlexModel flex;
    std::int64_t training_days = 0;
};

Json model_bundle_to_json(const ModelBundle& bundle);
ModelBundle model_bundle_from_json(const Json& j);

Json run_report_to_json(const RunReport& report);

// CLI configuration files.

struct DatasetConfig {
    // Synthetic: category names ("all" for the full suite).
    bool synthetic = true;
    std::vector<std::string> categories;  // empty = all
    int n_days = 365;
    CivilDate start_date{2017, 1, 2};
    std::uint64_t data_seed = 1;
    // CSV path per device (synthetic == false).
    struct CsvDevice {
        std::string path;
        std::string device_id;
        double true_lambda = 0.15;  // oracle rate for simulated decisions
    };
    std::vector<CsvDevice> csv_devices;
    double on_threshold = 0.05;
    int idle_gap = 1;
};

struct MarketConfig {
    std::string csv_path;  // empty = synthetic
    std::uint64_t seed = 7;
    SyntheticMarketParams params;
};

struct SimulateConfig {
    DatasetConfig dataset;
    MarketConfig market;
    PrequentialConfig run;
};

struct CompareConfig {
    DatasetConfig dataset;
    MarketConfig market;
    ExperimentConfig experiment;
};

SimulateConfig simulate_config_from_json(const Json& j);
CompareConfig compare_config_from_json(const Json& j);

Json synthetic_device_to_json(const SyntheticDeviceConfig& config);
SyntheticDeviceConfig synthetic_device_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);

}  // namespace flexsched

#endif
