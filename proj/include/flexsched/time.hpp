#ifndef FLEXSCHED_TIME_HPP
#define FLEXSCHED_TIME_HPP

#include <cstdint>
#include <string>

namespace flexsched {

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    bool operator==(const CivilDate&) const = default;
};

// Days since 1970-01-01 (may be negative).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

// 0 = Monday ... 6 = Sunday.
int weekday_from_days(std::int64_t days);

bool is_valid_date(const CivilDate& d);

// "YYYY-MM-DD"; throws parse_error on malformed input.
CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& d);

// UTC timestamp at minute resolution, the granularity of the input data.
struct Timestamp {
    std::int64_t minutes_since_epoch = 0;

    std::int64_t hour() const;       // floor division by 60
    std::int64_t day() const;        // floor division by 1440
    int minute_of_hour() const;
    int hour_of_day() const;
    CivilDate date() const;

    bool operator==(const Timestamp&) const = default;
    auto operator<=>(const Timestamp&) const = default;
};

// Accepts "YYYY-MM-DD HH:MM[:SS]" and "YYYY-MM-DDTHH:MM[:SS][Z]".
// Seconds must be zero when present. Throws parse_error otherwise.
Timestamp parse_timestamp(const std::string& text);

Timestamp timestamp_from_hour(std::int64_t hours_since_epoch);
std::string format_timestamp_hour(std::int64_t hours_since_epoch);

}  // namespace flexsched

#endif
