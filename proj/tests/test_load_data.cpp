#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "flexsched/load_data.hpp"
#include "flexsched/rng.hpp"
#include "flexsched/simulation.hpp"

using namespace flexsched;

namespace {

LoadCsv parse(const std::string& text) {
    std::istringstream in(text);
    return parse_load_csv(in, "dev");
}

LoadSeries series_of(std::vector<double> values) {
    LoadSeries s;
    s.device_id = "dev";
    s.start_hour = 0;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("sub-hourly samples average into one hourly value") {
    const LoadCsv load = parse(
        "timestamp,kwh\n"
        "2017-01-02T10:00:00Z,0.2\n"
        "2017-01-02T10:15:00Z,0.2\n"
        "2017-01-02T10:30:00Z,0.6\n"
        "2017-01-02T10:45:00Z,0.6\n");
    REQUIRE(load.hourly.values.size() == 1);
    CHECK(load.hourly.values[0] == doctest::Approx(0.4));
    CHECK(load.granularity_minutes == 15);
}

TEST_CASE("already-hourly input passes through unchanged") {
    const LoadCsv load = parse(
        "timestamp,kwh\n"
        "2017-01-02T00:00:00Z,0.1\n"
        "2017-01-02T01:00:00Z,0.2\n"
        "2017-01-02T02:00:00Z,0.3\n");
    REQUIRE(load.hourly.values.size() == 3);
    CHECK(load.hourly.values[0] == 0.1);
    CHECK(load.hourly.values[1] == 0.2);
    CHECK(load.hourly.values[2] == 0.3);
    CHECK(load.hourly.gap_hours.empty());
}

TEST_CASE("missing hour is zero-filled and flagged") {
    const LoadCsv load = parse(
        "timestamp,kwh\n"
        "2017-01-02T00:00:00Z,0.5\n"
        "2017-01-02T02:00:00Z,0.7\n");
    REQUIRE(load.hourly.values.size() == 3);
    CHECK(load.hourly.values[1] == 0.0);
    REQUIRE(load.hourly.gap_hours.size() == 1);
    CHECK(load.hourly.gap_hours[0] == 1);
}

TEST_CASE("aggregation preserves the hour span") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::ostringstream csv;
        csv << "timestamp,kwh\n";
        const int span = static_cast<int>(rng.next_int(1, 72));
        for (int h = 0; h < span; ++h) {
            if (h != 0 && h != span - 1 && rng.next_double() < 0.3) continue;
            csv << format_timestamp_hour(413000 + h).substr(0, 19) << "Z,"
                << rng.next_double() << "\n";
        }
        const LoadCsv load = parse(csv.str());
        CHECK(load.hourly.values.size() == static_cast<std::size_t>(span));
    }
}

TEST_CASE("load CSV error paths") {
    SUBCASE("malformed row names the line") {
        try {
            parse("timestamp,kwh\n2017-01-02T00:00:00Z,0.5\nnot-a-row\n");
            FAIL("expected parse error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse_error);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("non-monotone timestamps") {
        try {
            parse(
                "timestamp,kwh\n"
                "2017-01-02T01:00:00Z,0.5\n"
                "2017-01-02T00:00:00Z,0.5\n");
            FAIL("expected ordering error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ordering_error);
        }
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(parse("timestamp,kwh\n"), Error);
        try {
            parse("timestamp,kwh\n");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::empty_input);
        }
    }
}

TEST_CASE("event extraction follows the threshold rule") {
    const EventSeries events =
        extract_events(series_of({0, 0, 1.2, 0.9, 0, 0}), 0.1, 1);
    REQUIRE(events.events.size() == 1);
    CHECK(events.events[0].ready_hour == 2);
    CHECK(events.events[0].duration_hours == 2);
    REQUIRE(events.events[0].energy_per_hour.size() == 2);
    CHECK(events.events[0].energy_per_hour[0] == 1.2);
    CHECK(events.events[0].energy_per_hour[1] == 0.9);
}

TEST_CASE("all-zero series yields no events") {
    CHECK(extract_events(series_of({0, 0, 0, 0}), 0.1, 1).events.empty());
}

TEST_CASE("bursts separated by exactly the idle gap stay separate") {
    const EventSeries two =
        extract_events(series_of({1.0, 0.0, 0.0, 1.0}), 0.1, 2);
    CHECK(two.events.size() == 2);
    // One idle hour is below the required gap: the second burst is not a
    // fresh operation start.
    const EventSeries one =
        extract_events(series_of({1.0, 0.0, 1.0}), 0.1, 2);
    CHECK(one.events.size() == 1);
}

TEST_CASE("events round-trip through rendering and extraction") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        EventSeries original;
        original.device_id = "dev";
        std::int64_t cursor = 0;
        const int n = static_cast<int>(rng.next_int(1, 8));
        for (int i = 0; i < n; ++i) {
            OperationEvent ev;
            ev.ready_hour = cursor + rng.next_int(1, 10);
            ev.duration_hours = static_cast<int>(rng.next_int(1, 4));
            ev.duration_exact = ev.duration_hours;
            for (int h = 0; h < ev.duration_hours; ++h) {
                ev.energy_per_hour.push_back(rng.next_uniform(0.3, 2.0));
            }
            cursor = ev.ready_hour + ev.duration_hours + 1;
            original.events.push_back(ev);
        }
        const LoadSeries rendered = render_events(original, 0, cursor + 4);
        const EventSeries back = extract_events(rendered, 0.05, 1);
        REQUIRE(back.events.size() == original.events.size());
        for (std::size_t i = 0; i < back.events.size(); ++i) {
            CHECK(back.events[i].ready_hour == original.events[i].ready_hour);
            CHECK(back.events[i].duration_hours == original.events[i].duration_hours);
            for (std::size_t h = 0; h < back.events[i].energy_per_hour.size(); ++h) {
                CHECK(back.events[i].energy_per_hour[h] ==
                      original.events[i].energy_per_hour[h]);
            }
        }
    }
}

namespace {

OperationEvent event_with(double duration_exact, std::vector<double> energy) {
    OperationEvent ev;
    ev.ready_hour = 0;
    ev.duration_hours = static_cast<int>(energy.size());
    ev.duration_exact = duration_exact;
    ev.energy_per_hour = std::move(energy);
    return ev;
}

}  // namespace

TEST_CASE("signature length is the ceiling of the mean duration") {
    EventSeries events;
    events.events.push_back(event_with(1.5, {1.0, 0.4}));
    events.events.push_back(event_with(2.2, {0.9, 0.8, 0.2}));
    const DeviceSignature sig = extract_signature(events);
    CHECK(sig.length() == 2);  // ceil(1.85)
}

TEST_CASE("single-event signature is the identity") {
    EventSeries events;
    events.events.push_back(event_with(2.0, {1.0, 0.5}));
    const DeviceSignature sig = extract_signature(events);
    REQUIRE(sig.length() == 2);
    CHECK(sig.per_hour_demand[0] == doctest::Approx(1.0));
    CHECK(sig.per_hour_demand[1] == doctest::Approx(0.5));
}

TEST_CASE("short events contribute zero to later hours of the mean") {
    EventSeries events;
    events.events.push_back(event_with(1.0, {2.0}));
    events.events.push_back(event_with(2.0, {1.0, 1.0}));
    const DeviceSignature sig = extract_signature(events);
    REQUIRE(sig.length() == 2);  // ceil(1.5)
    CHECK(sig.per_hour_demand[0] == doctest::Approx(1.5));
    CHECK(sig.per_hour_demand[1] == doctest::Approx(0.5));
}

TEST_CASE("signature of an empty event series is an error") {
    CHECK_THROWS_AS(extract_signature(EventSeries{}), Error);
}

TEST_CASE("signature length bound holds on random event sets") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        EventSeries events;
        int min_dur = 100, max_dur = 0;
        const int n = static_cast<int>(rng.next_int(1, 12));
        for (int i = 0; i < n; ++i) {
            const int dur = static_cast<int>(rng.next_int(1, 6));
            std::vector<double> energy;
            for (int h = 0; h < dur; ++h) energy.push_back(rng.next_uniform(0.2, 2.0));
            events.events.push_back(event_with(dur, std::move(energy)));
            min_dur = std::min(min_dur, dur);
            max_dur = std::max(max_dur, dur);
        }
        const DeviceSignature sig = extract_signature(events);
        CHECK(sig.length() >= min_dur);
        CHECK(sig.length() <= max_dur + 1);
        for (double e : sig.per_hour_demand) CHECK(e > 0.0);
    }
}

TEST_CASE("sub-hourly durations refine the signature") {
    // 90 minutes of activity inside two clock hours: the hourly duration is
    // 2 but the raw trace measures 1.5.
    const LoadCsv load = parse(
        "timestamp,kwh\n"
        "2017-01-02T09:30:00Z,0.0\n"
        "2017-01-02T10:00:00Z,0.6\n"
        "2017-01-02T10:30:00Z,0.6\n"
        "2017-01-02T11:00:00Z,0.6\n"
        "2017-01-02T11:30:00Z,0.0\n"
        "2017-01-02T12:00:00Z,0.0\n");
    const EventSeries events = extract_events(load, 0.1, 1);
    REQUIRE(events.events.size() == 1);
    CHECK(events.events[0].duration_hours == 2);
    CHECK(events.events[0].duration_exact == doctest::Approx(1.5));
}

TEST_CASE("calendar features on fixed dates") {
    const CalendarFeatures monday = calendar_features({2017, 1, 2});
    CHECK(monday.day_of_week == 0);
    CHECK(monday.month == 1);
    CHECK_FALSE(monday.is_weekend);
    CHECK(monday.season == Season::winter);

    const CalendarFeatures saturday = calendar_features({2017, 7, 15});
    CHECK(saturday.day_of_week == 5);
    CHECK(saturday.is_weekend);
    CHECK(saturday.season == Season::summer);

    const CalendarFeatures nye = calendar_features({2017, 12, 31});
    CHECK(nye.month == 12);
    CHECK(nye.season == Season::winter);
    CHECK(nye.week_of_year <= 53);
}

TEST_CASE("synthetic operations stay close to their signature") {
    // Generator jitter of +/- 1 hour must keep the median duration gap
    // within an hour of the extracted signature length.
    SyntheticDeviceConfig config = regular_profile_device();
    config.jitter_minus = 0.15;
    config.jitter_plus = 0.2;
    const SyntheticData data = generate_synthetic(config, 99, 200, {2017, 1, 2});
    const DeviceSignature sig = extract_signature(data.events);
    std::vector<double> gaps;
    for (const OperationEvent& ev : data.events.events) {
        gaps.push_back(std::abs(ev.duration_exact - sig.length()));
    }
    REQUIRE(!gaps.empty());
    std::sort(gaps.begin(), gaps.end());
    CHECK(gaps[gaps.size() / 2] <= 1.0);
}
