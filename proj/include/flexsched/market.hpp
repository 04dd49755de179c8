#ifndef FLEXSCHED_MARKET_HPP
#define FLEXSCHED_MARKET_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flexsched/common.hpp"
#include "flexsched/flexoffer.hpp"

namespace flexsched {

struct MarketRecord {
    double spot = 0.0;        // price per kWh
    double up_price = 0.0;    // up-regulation price per kWh
    double down_price = 0.0;  // down-regulation price per kWh
    // Signed regulation volume in kWh: > 0 is an up-regulation deficit,
    // < 0 a down-regulation surplus, 0 balanced.
    double reg_volume = 0.0;
};

// Contiguous hourly market data. Immutable after ingest; all pricing
// operations are pure.
struct MarketSeries {
    std::int64_t start_hour = 0;  // hours since epoch
    std::vector<MarketRecord> records;
    std::vector<std::size_t> negative_price_hours;  // accepted, flagged

    std::size_t size() const { return records.size(); }
    const MarketRecord& at_hour(std::int64_t hour) const;
    bool covers(std::int64_t hour, int len) const;
};

struct SavingsBreakdown {
    Money delta_spot = 0.0;
    Money delta_reg = 0.0;
    Money total() const { return delta_spot + delta_reg; }
};

struct MarketOptions {
    // The regulation sum normally covers every operating hour; setting this
    // skips hour 0 of the operation.
    bool skip_first_reg_hour = false;
};

// CSV with header "timestamp,spot,up_price,down_price,reg_volume";
// hourly timestamps, no gaps.
MarketSeries ingest_market_csv(std::istream& source);

// Spot cost of an operation starting at `start` (series-global hour):
// sum of e_i * spot(start + i).
Money spot_cost(const std::vector<ProfileSlice>& profile, std::int64_t start,
                const MarketSeries& m);

// Positive when the new slot is cheaper than the original.
Money spot_savings(const std::vector<ProfileSlice>& profile, std::int64_t t_es,
                   std::int64_t t, const MarketSeries& m);

// Marginal regulation-market cost of running the operation at `start`:
// demand at a deficit hour deepens the deficit at the up-price spread;
// demand at a surplus hour absorbs surplus (capped at the surplus volume)
// at the down-price spread; balanced hours contribute nothing.
Money reg_contribution(const std::vector<ProfileSlice>& profile, std::int64_t start,
                       const MarketSeries& m, const MarketOptions& opts = {});

Money reg_savings(const std::vector<ProfileSlice>& profile, std::int64_t t_es,
                  std::int64_t t, const MarketSeries& m,
                  const MarketOptions& opts = {});

// Permutes whole days (series truncated to full days first); within-day
// hourly structure is preserved and the permutation is deterministic per seed.
MarketSeries shuffle_market(const MarketSeries& m, std::uint64_t seed);

}  // namespace flexsched

#endif
