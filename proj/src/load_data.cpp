#include "flexsched/load_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "flexsched/common.hpp"

namespace flexsched {

const char* season_name(Season s) {
    switch (s) {
        case Season::winter: return "winter";
        case Season::spring: return "spring";
        case Season::summer: return "summer";
        case Season::autumn: return "autumn";
    }
    return "?";
}

Season season_of_month(int month) {
    // Meteorological quarters: Dec-Feb, Mar-May, Jun-Aug, Sep-Nov.
    if (month == 12 || month <= 2) return Season::winter;
    if (month <= 5) return Season::spring;
    if (month <= 8) return Season::summer;
    return Season::autumn;
}

CalendarFeatures calendar_features(const CivilDate& date) {
    if (!is_valid_date(date)) {
        raise(ErrorCode::domain_error, "invalid date " + format_date(date));
    }
    CalendarFeatures f;
    const std::int64_t days = days_from_civil(date);
    f.day_of_week = weekday_from_days(days);
    f.month = date.month;
    f.is_weekend = f.day_of_week >= 5;
    f.season = season_of_month(date.month);
    const std::int64_t year_start = days_from_civil({date.year, 1, 1});
    f.week_of_year = static_cast<int>((days - year_start) / 7) + 1;
    return f;
}

namespace {

double parse_kwh(const std::string& field, std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        raise(ErrorCode::parse_error,
              "line " + std::to_string(line_no) + ": bad kwh value '" + field + "'");
    }
    if (value < 0.0) {
        raise(ErrorCode::parse_error,
              "line " + std::to_string(line_no) + ": negative load " + field);
    }
    return value;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

LoadCsv parse_load_csv(std::istream& source, const std::string& device_id) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(source, line)) {
        raise(ErrorCode::empty_input, "load CSV is empty");
    }
    ++line_no;
    strip_cr(line);
    if (line != "timestamp,kwh") {
        raise(ErrorCode::parse_error, "expected header 'timestamp,kwh', got '" + line + "'");
    }

    LoadCsv out;
    out.hourly.device_id = device_id;
    std::vector<RawSample>& raw = out.raw;
    while (std::getline(source, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": missing comma");
        }
        RawSample sample;
        try {
            sample.time = parse_timestamp(line.substr(0, comma));
        } catch (const Error& e) {
            raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
        sample.kwh = parse_kwh(line.substr(comma + 1), line_no);
        if (!raw.empty() && sample.time <= raw.back().time) {
            raise(ErrorCode::ordering_error,
                  "line " + std::to_string(line_no) + ": timestamps must be strictly increasing");
        }
        raw.push_back(sample);
    }
    if (raw.empty()) {
        raise(ErrorCode::empty_input, "load CSV has no data rows");
    }

    // Detect source granularity from the smallest positive step.
    int granularity = 60;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        const auto step = raw[i].time.minutes_since_epoch - raw[i - 1].time.minutes_since_epoch;
        if (step < 60) granularity = std::min<int>(granularity, static_cast<int>(step));
    }
    out.granularity_minutes = granularity;

    // Average sub-hourly samples into hourly buckets; fill gaps with zero.
    const std::int64_t first_hour = raw.front().time.hour();
    const std::int64_t last_hour = raw.back().time.hour();
    const auto n_hours = static_cast<std::size_t>(last_hour - first_hour + 1);
    out.hourly.start_hour = first_hour;
    out.hourly.values.assign(n_hours, 0.0);
    std::vector<int> counts(n_hours, 0);
    for (const RawSample& s : raw) {
        const auto idx = static_cast<std::size_t>(s.time.hour() - first_hour);
        out.hourly.values[idx] += s.kwh;
        ++counts[idx];
    }
    for (std::size_t i = 0; i < n_hours; ++i) {
        if (counts[i] == 0) {
            out.hourly.gap_hours.push_back(i);
        } else {
            out.hourly.values[i] /= counts[i];
        }
    }
    return out;
}

LoadSeries ingest_load_csv(std::istream& source, const std::string& device_id) {
    return parse_load_csv(source, device_id).hourly;
}

namespace {

// Shared hourly segmentation: returns [begin, end) index runs of consecutive
// >= threshold hours that qualify as operation starts under the idle-gap rule.
std::vector<std::pair<std::size_t, std::size_t>> segment_runs(
    const std::vector<double>& values, double threshold, int idle_gap) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    // Hours before the series count as idle.
    int idle_run = idle_gap;
    std::size_t i = 0;
    while (i < values.size()) {
        if (values[i] >= threshold) {
            std::size_t end = i;
            while (end < values.size() && values[end] >= threshold) ++end;
            if (idle_run >= idle_gap) runs.emplace_back(i, end);
            idle_run = 0;
            i = end;
        } else {
            ++idle_run;
            ++i;
        }
    }
    return runs;
}

}  // namespace

EventSeries extract_events(const LoadSeries& series, double on_threshold,
                           int idle_gap) {
    if (on_threshold <= 0.0) {
        raise(ErrorCode::domain_error, "on_threshold must be > 0");
    }
    if (idle_gap < 1) {
        raise(ErrorCode::domain_error, "idle_gap must be >= 1");
    }
    EventSeries out;
    out.device_id = series.device_id;
    for (const auto& [begin, end] : segment_runs(series.values, on_threshold, idle_gap)) {
        OperationEvent ev;
        ev.ready_hour = series.hour_at(begin);
        ev.duration_hours = static_cast<int>(end - begin);
        ev.duration_exact = ev.duration_hours;
        ev.energy_per_hour.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                                  series.values.begin() + static_cast<std::ptrdiff_t>(end));
        out.events.push_back(std::move(ev));
    }
    return out;
}

EventSeries extract_events(const LoadCsv& load, double on_threshold, int idle_gap) {
    EventSeries out = extract_events(load.hourly, on_threshold, idle_gap);
    if (load.granularity_minutes >= 60) return out;

    // Refine each event's duration on the raw grid: the span of >= threshold
    // samples within the event's hourly window, plus one sample period.
    const double step_hours = load.granularity_minutes / 60.0;
    for (OperationEvent& ev : out.events) {
        const std::int64_t lo = ev.ready_hour * 60;
        const std::int64_t hi = (ev.ready_hour + ev.duration_hours) * 60;
        std::int64_t first = -1, last = -1;
        for (const RawSample& s : load.raw) {
            if (s.time.minutes_since_epoch < lo) continue;
            if (s.time.minutes_since_epoch >= hi) break;
            // Raw samples carry average power over the period; compare
            // against a per-sample share of the hourly threshold.
            if (s.kwh >= on_threshold * step_hours) {
                if (first < 0) first = s.time.minutes_since_epoch;
                last = s.time.minutes_since_epoch;
            }
        }
        if (first >= 0) {
            ev.duration_exact =
                static_cast<double>(last - first + load.granularity_minutes) / 60.0;
        }
    }
    return out;
}

DeviceSignature extract_signature(const EventSeries& events) {
    if (events.events.empty()) {
        raise(ErrorCode::insufficient_data,
              "cannot extract a signature from an empty event series");
    }
    double mean_duration = 0.0;
    std::size_t max_len = 0;
    for (const OperationEvent& ev : events.events) {
        mean_duration += ev.duration_exact;
        max_len = std::max(max_len, ev.energy_per_hour.size());
    }
    mean_duration /= static_cast<double>(events.events.size());
    const auto k = static_cast<std::size_t>(std::ceil(mean_duration - 1e-12));

    // Events shorter than hour i contribute 0 to that hour's mean.
    DeviceSignature sig;
    sig.per_hour_demand.assign(std::min(k, max_len), 0.0);
    for (const OperationEvent& ev : events.events) {
        for (std::size_t i = 0; i < sig.per_hour_demand.size() && i < ev.energy_per_hour.size(); ++i) {
            sig.per_hour_demand[i] += ev.energy_per_hour[i];
        }
    }
    for (double& e : sig.per_hour_demand) {
        e /= static_cast<double>(events.events.size());
    }
    return sig;
}

LoadSeries render_events(const EventSeries& events, std::int64_t start_hour,
                         std::int64_t n_hours) {
    LoadSeries out;
    out.device_id = events.device_id;
    out.start_hour = start_hour;
    out.values.assign(static_cast<std::size_t>(n_hours), 0.0);
    for (const OperationEvent& ev : events.events) {
        for (std::size_t i = 0; i < ev.energy_per_hour.size(); ++i) {
            const std::int64_t h = ev.ready_hour + static_cast<std::int64_t>(i) - start_hour;
            if (h >= 0 && h < n_hours) {
                out.values[static_cast<std::size_t>(h)] = ev.energy_per_hour[i];
            }
        }
    }
    return out;
}

}  // namespace flexsched
