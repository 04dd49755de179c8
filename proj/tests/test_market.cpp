#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "flexsched/market.hpp"
#include "flexsched/rng.hpp"
#include "test_util.hpp"

using namespace flexsched;

namespace {

MarketSeries parse(const std::string& text) {
    std::istringstream in(text);
    return ingest_market_csv(in);
}

std::string well_formed_day() {
    std::ostringstream csv;
    csv << "timestamp,spot,up_price,down_price,reg_volume\n";
    for (int h = 0; h < 24; ++h) {
        csv << format_timestamp_hour(h) << ',' << 0.2 + 0.01 * h << ",0.3,0.1,"
            << (h % 2 == 0 ? 1.0 : -1.0) << "\n";
    }
    return csv.str();
}

std::vector<ProfileSlice> profile(std::initializer_list<double> energies) {
    std::vector<ProfileSlice> p;
    for (double e : energies) p.push_back({e, e});
    return p;
}

MarketSeries flat_market(int hours, double spot) {
    MarketSeries m;
    m.start_hour = 0;
    for (int h = 0; h < hours; ++h) m.records.push_back({spot, spot, spot, 0.0});
    return m;
}

}  // namespace

TEST_CASE("a well-formed day parses completely") {
    const MarketSeries m = parse(well_formed_day());
    CHECK(m.size() == 24);
    CHECK(m.negative_price_hours.empty());
    CHECK(m.at_hour(5).spot == doctest::Approx(0.25));
}

TEST_CASE("an hour gap is an error naming the missing hour") {
    std::ostringstream csv;
    csv << "timestamp,spot,up_price,down_price,reg_volume\n";
    for (int h = 0; h < 24; ++h) {
        if (h == 13) continue;
        csv << format_timestamp_hour(h) << ",0.2,0.3,0.1,0\n";
    }
    try {
        parse(csv.str());
        FAIL("expected gap error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::gap_error);
        CHECK(std::string(e.what()).find("13:00") != std::string::npos);
    }
}

TEST_CASE("negative prices are accepted but flagged") {
    const MarketSeries m = parse(
        "timestamp,spot,up_price,down_price,reg_volume\n"
        "1970-01-01T00:00:00Z,-0.05,0.1,0.0,0\n"
        "1970-01-01T01:00:00Z,0.2,0.3,0.1,0\n");
    CHECK(m.size() == 2);
    REQUIRE(m.negative_price_hours.size() == 1);
    CHECK(m.negative_price_hours[0] == 0);
}

TEST_CASE("spot cost sums demand against prices") {
    MarketSeries m = flat_market(12, 0.0);
    m.records[10].spot = 0.30;
    m.records[11].spot = 0.50;
    CHECK(spot_cost(profile({1.0, 1.0}), 10, m) == doctest::Approx(0.80));
    CHECK(spot_cost(profile({0.0}), 10, m) == 0.0);
    CHECK(spot_cost(profile({1.0, 1.0}), 3, m) == 0.0);  // zero prices
}

TEST_CASE("window outside the series is a range error") {
    const MarketSeries m = flat_market(12, 0.2);
    CHECK_THROWS_AS(spot_cost(profile({1.0, 1.0}), 11, m), Error);
    CHECK_THROWS_AS(spot_cost(profile({1.0}), -1, m), Error);
}

TEST_CASE("spot savings are positive toward cheaper slots") {
    MarketSeries m = flat_market(12, 0.0);
    m.records[0].spot = m.records[1].spot = 0.50;
    m.records[6].spot = m.records[7].spot = 0.30;
    const auto rho = profile({1.0, 1.0});
    CHECK(spot_savings(rho, 0, 0, m) == 0.0);
    CHECK(spot_savings(rho, 0, 6, m) == doctest::Approx(0.40));
    CHECK(spot_savings(rho, 6, 0, m) == doctest::Approx(-0.40));
}

TEST_CASE("regulation contribution handles the three volume states") {
    MarketSeries m = flat_market(8, 0.40);
    SUBCASE("balanced hours cost nothing") {
        CHECK(reg_contribution(profile({1.0, 2.0}), 2, m) == 0.0);
    }
    SUBCASE("surplus hours absorb demand as a benefit") {
        m.records[3].reg_volume = -5.0;
        m.records[3].down_price = 0.10;
        CHECK(reg_contribution(profile({1.0}), 3, m) == doctest::Approx(-0.30));
    }
    SUBCASE("the benefit is capped by the surplus volume") {
        m.records[3].reg_volume = -1.0;
        m.records[3].down_price = 0.10;
        CHECK(reg_contribution(profile({2.0}), 3, m) == doctest::Approx(-0.30));
    }
    SUBCASE("deficit hours deepen the imbalance") {
        m.records[3].reg_volume = 2.0;
        m.records[3].up_price = 0.60;
        CHECK(reg_contribution(profile({1.5}), 3, m) == doctest::Approx(1.5 * 0.20));
    }
    SUBCASE("the first operating hour can be excluded") {
        m.records[3].reg_volume = 2.0;
        m.records[3].up_price = 0.60;
        MarketOptions opts;
        opts.skip_first_reg_hour = true;
        CHECK(reg_contribution(profile({1.5}), 3, m, opts) == 0.0);
        CHECK(reg_contribution(profile({9.0, 1.5}), 2, m, opts) ==
              doctest::Approx(1.5 * 0.20));
    }
}

TEST_CASE("regulation savings compose contributions") {
    MarketSeries m = flat_market(12, 0.40);
    // Hour 2: up-regulation deficit costing 0.20 per kWh of demand.
    m.records[2].reg_volume = 3.0;
    m.records[2].up_price = 0.60;
    // Hour 8: surplus benefiting 0.30 per absorbed kWh.
    m.records[8].reg_volume = -4.0;
    m.records[8].down_price = 0.10;
    const auto rho = profile({1.0});
    CHECK(reg_savings(rho, 2, 2, m) == 0.0);
    CHECK(reg_savings(rho, 2, 8, m) == doctest::Approx(0.50));
    CHECK(reg_savings(rho, 4, 5, m) == 0.0);  // both balanced
}

TEST_CASE("savings are antisymmetric") {
    Rng rng(61);
    const MarketSeries m = testutil::random_market(rng, 0, 72);
    const auto rho = profile({1.2, 0.7, 0.4});
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = rng.next_int(0, 69);
        const auto b = rng.next_int(0, 69);
        CHECK(spot_savings(rho, a, b, m) == doctest::Approx(-spot_savings(rho, b, a, m)));
        CHECK(reg_savings(rho, a, b, m) == doctest::Approx(-reg_savings(rho, b, a, m)));
    }
}

TEST_CASE("spot cost is linear in the profile") {
    Rng rng(67);
    const MarketSeries m = testutil::random_market(rng, 0, 48);
    const auto rho = profile({0.8, 0.5});
    const auto doubled = profile({1.6, 1.0});
    for (int start = 0; start < 46; ++start) {
        CHECK(spot_cost(doubled, start, m) ==
              doctest::Approx(2.0 * spot_cost(rho, start, m)).epsilon(1e-12));
    }
}

TEST_CASE("surplus depth never reduces the benefit and the cap binds") {
    MarketSeries m = flat_market(4, 0.40);
    m.records[1].down_price = 0.10;
    const auto rho = profile({2.0});
    double previous = 0.0;
    for (double v = 0.5; v <= 6.0; v += 0.5) {
        m.records[1].reg_volume = -v;
        const double contribution = reg_contribution(rho, 1, m);
        CHECK(contribution <= previous + 1e-12);  // more surplus never hurts
        CHECK(-contribution <= v * 0.30 + 1e-12);
        previous = contribution;
    }
}

TEST_CASE("day shuffling is a seeded permutation of whole days") {
    Rng rng(71);
    const MarketSeries m = testutil::random_market(rng, 0, 24 * 10 + 5);
    const MarketSeries a = shuffle_market(m, 1234);
    const MarketSeries b = shuffle_market(m, 1234);
    REQUIRE(a.size() == 240);  // truncated to full days
    REQUIRE(b.size() == 240);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.records[i].spot == b.records[i].spot);
    }

    // Multiset of days preserved: match day fingerprints.
    std::map<double, int> original, shuffled;
    for (std::size_t d = 0; d < 10; ++d) {
        double fp_o = 0.0, fp_s = 0.0;
        for (std::size_t h = 0; h < 24; ++h) {
            fp_o += m.records[d * 24 + h].spot * static_cast<double>(h + 1);
            fp_s += a.records[d * 24 + h].spot * static_cast<double>(h + 1);
        }
        ++original[fp_o];
        ++shuffled[fp_s];
    }
    CHECK(original == shuffled);
}

TEST_CASE("single-day series shuffle to themselves") {
    Rng rng(73);
    const MarketSeries m = testutil::random_market(rng, 48, 24);
    const MarketSeries s = shuffle_market(m, 5);
    REQUIRE(s.size() == 24);
    for (std::size_t i = 0; i < 24; ++i) {
        CHECK(s.records[i].spot == m.records[i].spot);
    }
    CHECK(s.start_hour == m.start_hour);
}
