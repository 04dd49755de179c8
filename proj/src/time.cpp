#include "flexsched/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "flexsched/common.hpp"

namespace flexsched {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::ordering_error: return "ordering_error";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::insufficient_data: return "insufficient_data";
        case ErrorCode::gap_error: return "gap_error";
        case ErrorCode::range_error: return "range_error";
        case ErrorCode::dimension_error: return "dimension_error";
        case ErrorCode::domain_error: return "domain_error";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::no_feasible_schedule: return "no_feasible_schedule";
        case ErrorCode::invalid_observation: return "invalid_observation";
        case ErrorCode::config_error: return "config_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::internal_error: return "internal_error";
    }
    return "unknown";
}

// Low-level civil calendar arithmetic (proleptic Gregorian).
std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    unsigned m = static_cast<unsigned>(d.month);
    unsigned day = static_cast<unsigned>(d.day);
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                     static_cast<int>(day)};
}

int weekday_from_days(std::int64_t days) {
    // 1970-01-01 was a Thursday; map to Monday = 0.
    std::int64_t w = (days + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

bool is_valid_date(const CivilDate& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    int max_day = lengths[static_cast<std::size_t>(d.month - 1)];
    const bool leap =
        (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) max_day = 29;
    return d.day <= max_day;
}

namespace {

bool parse_int_field(const char* begin, const char* end, int& out) {
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

CivilDate parse_date(const std::string& text) {
    CivilDate d;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_int_field(text.data(), text.data() + 4, d.year) ||
        !parse_int_field(text.data() + 5, text.data() + 7, d.month) ||
        !parse_int_field(text.data() + 8, text.data() + 10, d.day) ||
        !is_valid_date(d)) {
        raise(ErrorCode::parse_error, "invalid date: '" + text + "'");
    }
    return d;
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::int64_t Timestamp::hour() const {
    std::int64_t h = minutes_since_epoch / 60;
    if (minutes_since_epoch % 60 < 0) --h;
    return h;
}

std::int64_t Timestamp::day() const {
    std::int64_t d = minutes_since_epoch / 1440;
    if (minutes_since_epoch % 1440 < 0) --d;
    return d;
}

int Timestamp::minute_of_hour() const {
    return static_cast<int>(minutes_since_epoch - hour() * 60);
}

int Timestamp::hour_of_day() const {
    return static_cast<int>(hour() - day() * 24);
}

CivilDate Timestamp::date() const { return civil_from_days(day()); }

Timestamp parse_timestamp(const std::string& text) {
    // Date part, separator, then HH:MM with optional :SS and trailing Z.
    if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T')) {
        raise(ErrorCode::parse_error, "invalid timestamp: '" + text + "'");
    }
    CivilDate d = parse_date(text.substr(0, 10));
    std::string rest = text.substr(11);
    if (!rest.empty() && rest.back() == 'Z') rest.pop_back();
    int hh = 0, mm = 0, ss = 0;
    bool ok = rest.size() >= 5 && rest[2] == ':' &&
              parse_int_field(rest.data(), rest.data() + 2, hh) &&
              parse_int_field(rest.data() + 3, rest.data() + 5, mm);
    if (ok && rest.size() > 5) {
        ok = rest.size() == 8 && rest[5] == ':' &&
             parse_int_field(rest.data() + 6, rest.data() + 8, ss);
    } else if (ok && rest.size() != 5) {
        ok = false;
    }
    if (!ok || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss != 0) {
        raise(ErrorCode::parse_error, "invalid timestamp: '" + text + "'");
    }
    return Timestamp{days_from_civil(d) * 1440 + hh * 60 + mm};
}

Timestamp timestamp_from_hour(std::int64_t hours_since_epoch) {
    return Timestamp{hours_since_epoch * 60};
}

std::string format_timestamp_hour(std::int64_t hours_since_epoch) {
    Timestamp ts = timestamp_from_hour(hours_since_epoch);
    char buf[32];
    CivilDate d = ts.date();
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00Z", d.year,
                  d.month, d.day, ts.hour_of_day());
    return buf;
}

}  // namespace flexsched
