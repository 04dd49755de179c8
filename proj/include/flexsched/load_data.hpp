#ifndef FLEXSCHED_LOAD_DATA_HPP
#define FLEXSCHED_LOAD_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flexsched/common.hpp"
#include "flexsched/time.hpp"

namespace flexsched {

// Hourly device-level energy readings. Hours are contiguous from `start`;
// hours that were absent in the source are zero-filled and listed in
// `gap_hours`.
struct LoadSeries {
    std::string device_id;
    std::int64_t start_hour = 0;  // hours since epoch, UTC
    std::vector<double> values;   // kWh per hour, finite and >= 0
    std::vector<std::size_t> gap_hours;  // indices into `values`

    std::int64_t hour_at(std::size_t index) const {
        return start_hour + static_cast<std::int64_t>(index);
    }
};

struct OperationEvent {
    std::int64_t ready_hour = 0;  // hours since epoch
    int duration_hours = 1;
    // Fractional duration in hours, measured at source granularity when the
    // input was sub-hourly; equals duration_hours otherwise.
    double duration_exact = 1.0;
    std::vector<double> energy_per_hour;  // kWh, all > 0
};

struct EventSeries {
    std::string device_id;
    std::vector<OperationEvent> events;  // sorted by ready_hour, non-overlapping
};

// Canonical per-device operation profile: mean hourly demand and the ceiling
// of the mean operation duration.
struct DeviceSignature {
    std::vector<double> per_hour_demand;  // kWh, length() entries, all > 0
    int length() const { return static_cast<int>(per_hour_demand.size()); }
};

enum class Season { winter, spring, summer, autumn };

const char* season_name(Season s);

struct CalendarFeatures {
    int day_of_week = 0;   // 0 = Monday .. 6 = Sunday
    int week_of_year = 1;  // 1..53
    int month = 1;         // 1..12
    bool is_weekend = false;
    Season season = Season::winter;
};

CalendarFeatures calendar_features(const CivilDate& date);
Season season_of_month(int month);

// Raw CSV sample kept around so that event durations can be measured at
// source granularity before hourly aggregation.
struct RawSample {
    Timestamp time;
    double kwh = 0.0;
};

struct LoadCsv {
    LoadSeries hourly;
    std::vector<RawSample> raw;
    int granularity_minutes = 60;
};

// CSV with header "timestamp,kwh"; sub-hourly samples are averaged into
// hourly values, missing hours zero-filled and flagged.
LoadCsv parse_load_csv(std::istream& source, const std::string& device_id);
LoadSeries ingest_load_csv(std::istream& source, const std::string& device_id);

// Threshold segmentation: an operation starts at the first hour >= threshold
// preceded by at least `idle_gap` sub-threshold hours (the series start
// counts as idle) and ends at the last consecutive hour >= threshold.
EventSeries extract_events(const LoadSeries& series, double on_threshold,
                           int idle_gap);

// Same segmentation, but when raw sub-hourly samples are available the
// fractional operation duration is measured on the raw grid.
EventSeries extract_events(const LoadCsv& load, double on_threshold,
                           int idle_gap);

DeviceSignature extract_signature(const EventSeries& events);

// Renders events onto a zero baseline covering [start_hour, start_hour + n_hours).
LoadSeries render_events(const EventSeries& events, std::int64_t start_hour,
                         std::int64_t n_hours);

}  // namespace flexsched

#endif
