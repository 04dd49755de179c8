#include "flexsched/market.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <string>

#include "flexsched/rng.hpp"
#include "flexsched/time.hpp"

namespace flexsched {

const MarketRecord& MarketSeries::at_hour(std::int64_t hour) const {
    const std::int64_t idx = hour - start_hour;
    if (idx < 0 || idx >= static_cast<std::int64_t>(records.size())) {
        raise(ErrorCode::range_error,
              "hour " + format_timestamp_hour(hour) + " outside market series");
    }
    return records[static_cast<std::size_t>(idx)];
}

bool MarketSeries::covers(std::int64_t hour, int len) const {
    return hour >= start_hour &&
           hour + len <= start_hour + static_cast<std::int64_t>(records.size());
}

namespace {

double parse_field(const std::string& line, std::size_t& pos, std::size_t line_no,
                   bool last) {
    const auto end = last ? line.size() : line.find(',', pos);
    if (!last && end == std::string::npos) {
        raise(ErrorCode::parse_error,
              "line " + std::to_string(line_no) + ": too few fields");
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, value);
    if (ec != std::errc{} || ptr != line.data() + end || !std::isfinite(value)) {
        raise(ErrorCode::parse_error,
              "line " + std::to_string(line_no) + ": bad numeric field '" +
                  line.substr(pos, end - pos) + "'");
    }
    pos = last ? line.size() : end + 1;
    return value;
}

}  // namespace

MarketSeries ingest_market_csv(std::istream& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(source, line)) {
        raise(ErrorCode::empty_input, "market CSV is empty");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,spot,up_price,down_price,reg_volume") {
        raise(ErrorCode::parse_error,
              "expected header 'timestamp,spot,up_price,down_price,reg_volume'");
    }

    MarketSeries series;
    bool first = true;
    std::int64_t expected_hour = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            raise(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": missing fields");
        }
        Timestamp ts;
        try {
            ts = parse_timestamp(line.substr(0, comma));
        } catch (const Error& e) {
            raise(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (ts.minute_of_hour() != 0) {
            raise(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": market timestamps must be hour-aligned");
        }
        const std::int64_t hour = ts.hour();
        if (first) {
            series.start_hour = hour;
            expected_hour = hour;
            first = false;
        }
        if (hour != expected_hour) {
            raise(ErrorCode::gap_error,
                  "missing market hour " + format_timestamp_hour(expected_hour));
        }
        ++expected_hour;

        std::size_t pos = comma + 1;
        MarketRecord rec;
        rec.spot = parse_field(line, pos, line_no, false);
        rec.up_price = parse_field(line, pos, line_no, false);
        rec.down_price = parse_field(line, pos, line_no, false);
        rec.reg_volume = parse_field(line, pos, line_no, true);
        if (rec.spot < 0.0 || rec.up_price < 0.0 || rec.down_price < 0.0) {
            // Negative prices occur in real markets; keep the row but flag it.
            series.negative_price_hours.push_back(series.records.size());
        }
        series.records.push_back(rec);
    }
    if (series.records.empty()) {
        raise(ErrorCode::empty_input, "market CSV has no data rows");
    }
    return series;
}

namespace {

void check_window(const std::vector<ProfileSlice>& profile, std::int64_t start,
                  const MarketSeries& m) {
    if (!m.covers(start, static_cast<int>(profile.size()))) {
        raise(ErrorCode::range_error,
              "operation window starting " + format_timestamp_hour(start) +
                  " extends outside the market series");
    }
}

}  // namespace

Money spot_cost(const std::vector<ProfileSlice>& profile, std::int64_t start,
                const MarketSeries& m) {
    check_window(profile, start, m);
    Money cost = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        cost += profile[i].e_max * m.at_hour(start + static_cast<std::int64_t>(i)).spot;
    }
    return cost;
}

Money spot_savings(const std::vector<ProfileSlice>& profile, std::int64_t t_es,
                   std::int64_t t, const MarketSeries& m) {
    return spot_cost(profile, t_es, m) - spot_cost(profile, t, m);
}

Money reg_contribution(const std::vector<ProfileSlice>& profile, std::int64_t start,
                       const MarketSeries& m, const MarketOptions& opts) {
    check_window(profile, start, m);
    Money total = 0.0;
    for (std::size_t i = opts.skip_first_reg_hour ? 1u : 0u; i < profile.size(); ++i) {
        const MarketRecord& rec = m.at_hour(start + static_cast<std::int64_t>(i));
        const double e = profile[i].e_max;
        if (rec.reg_volume > 0.0) {
            // Extra demand deepens an up-regulation deficit.
            total += e * std::abs(rec.up_price - rec.spot);
        } else if (rec.reg_volume < 0.0) {
            // Extra demand absorbs surplus, but never more than is traded.
            total -= std::min(e, std::abs(rec.reg_volume)) *
                     std::abs(rec.spot - rec.down_price);
        }
    }
    return total;
}

Money reg_savings(const std::vector<ProfileSlice>& profile, std::int64_t t_es,
                  std::int64_t t, const MarketSeries& m, const MarketOptions& opts) {
    return reg_contribution(profile, t_es, m, opts) -
           reg_contribution(profile, t, m, opts);
}

MarketSeries shuffle_market(const MarketSeries& m, std::uint64_t seed) {
    const std::size_t n_days = m.records.size() / 24;
    MarketSeries out;
    out.start_hour = m.start_hour;
    if (n_days == 0) return out;

    std::vector<std::size_t> order(n_days);
    for (std::size_t i = 0; i < n_days; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    out.records.reserve(n_days * 24);
    for (std::size_t day : order) {
        for (std::size_t h = 0; h < 24; ++h) {
            out.records.push_back(m.records[day * 24 + h]);
        }
    }
    for (std::size_t idx = 0; idx < out.records.size(); ++idx) {
        const MarketRecord& rec = out.records[idx];
        if (rec.spot < 0.0 || rec.up_price < 0.0 || rec.down_price < 0.0) {
            out.negative_price_hours.push_back(idx);
        }
    }
    return out;
}

}  // namespace flexsched
