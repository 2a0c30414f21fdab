#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "arb/kernel.hpp"
#include "arb/marketdata.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace arb;

namespace {

// 2025-09-01 00:00:00 UTC.
constexpr double kDay0 = 1756684800.0;

// Executes a swap against x*y = L^2 reserves at price P = y/x, with the fee
// taken from the input amount.
SwapRecord execute(double price, double l, double amount_in, SwapDirection dir, double fee, double t) {
    double x = l / std::sqrt(price);
    double y = l * std::sqrt(price);
    const double a = (1.0 - fee) * amount_in;
    SwapRecord s;
    s.timestamp = t;
    s.direction = dir;
    s.amount_in = amount_in;
    s.amount_out = dir == SwapDirection::BaseToQuote ? y - l * l / (x + a) : x - l * l / (y + a);
    return s;
}

}  // namespace

TEST_CASE("tick files: header, sorting and error reporting") {
    std::istringstream in("timestamp,venue,bid,ask\n20,b,99,101\n10,a,100,100.5\n\n30,a,100.1,100.2\n");
    LoadReport rep;
    const auto ticks = read_ticks(in, &rep);
    REQUIRE(ticks.size() == 3);
    CHECK(rep.rows == 3);
    CHECK(rep.errors.empty());
    CHECK(ticks[0].venue == "a");
    CHECK(ticks[1].timestamp == 20.0);

    std::string many = "timestamp,venue,bid,ask\n";
    for (int i = 0; i < 300; ++i) many += std::to_string(i) + ",x,1,2\n";
    std::istringstream one_bad(many + "300,x,2,1\n");
    CHECK(read_ticks(one_bad, &rep).size() == 300);
    REQUIRE(rep.errors.size() == 1);
    CHECK(rep.errors[0] == "line 302: bid above ask");

    std::istringstream too_many("timestamp,venue,bid,ask\n1,x,1,2\n2,x,abc,2\n");
    CHECK_THROWS_AS(read_ticks(too_many), DataError);

    std::istringstream empty("");
    CHECK(read_ticks(empty, &rep).empty());
    CHECK(rep.warnings.size() == 1);
    CHECK_THROWS_AS(load_ticks("/nonexistent/ticks.csv"), DataError);
}

TEST_CASE("swap files round trip") {
    std::vector<SwapRecord> swaps(2);
    swaps[0] = {100, 1000.5, SwapDirection::BaseToQuote, 1.25, 2500.123456789};
    swaps[1] = {101, 1012.0, SwapDirection::QuoteToBase, 3000.0, 1.4999999};
    const auto path = std::filesystem::temp_directory_path() / "arb_test_swaps.csv";
    {
        std::ofstream out(path);
        write_swaps(out, swaps);
    }
    const auto back = load_swaps(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].amount_out == swaps[0].amount_out);
    CHECK(back[1].direction == SwapDirection::QuoteToBase);
    CHECK(back[1].block == 101);
    CHECK(back[0].implied_price() == doctest::Approx(2500.123456789 / 1.25));
    CHECK(back[1].implied_price() == doctest::Approx(3000.0 / 1.4999999));
    CHECK(back[1].base_amount() == 1.4999999);
    CHECK(back[1].quote_amount() == 3000.0);

    std::istringstream bad("block,timestamp,direction,amount_in,amount_out\n1,2,sideways,1,1\n");
    LoadReport rep;
    CHECK_THROWS_AS(read_swaps(bad, &rep), DataError);
    REQUIRE(rep.errors.size() == 1);
    CHECK(rep.errors[0].find("direction") != std::string::npos);
}

TEST_CASE("best quotes over the delayed window") {
    const std::vector<PriceTick> ticks = {
        {90.0, "a", 99.0, 101.0},  {93.0, "b", 99.5, 100.8}, {99.0, "a", 99.7, 100.9},
        {104.0, "b", 98.0, 100.2}, {105.0, "a", 120.0, 121.0},
    };
    // t = 100 with delay 8, window 12 covers [92, 104].
    const auto q = best_cross_venue(ticks, 100.0, 12.0, 8.0);
    REQUIRE(q);
    CHECK(q->bid == 99.7);
    CHECK(q->ask == 100.2);
    CHECK_FALSE(best_cross_venue(ticks, 200.0));
    CHECK_THROWS_AS(best_cross_venue(ticks, 100.0, 0.0), InvalidArgument);
}

TEST_CASE("the pre-trade pool price is recovered from an executed swap") {
    const double l = 5.0e5;
    for (const auto dir : {SwapDirection::BaseToQuote, SwapDirection::QuoteToBase}) {
        for (double size : {0.01, 10.0, 5000.0}) {
            const double amount = dir == SwapDirection::BaseToQuote ? size : size * 2500.0;
            const SwapRecord s = execute(2500.0, l, amount, dir, 0.003, 0.0);
            MispriceSettings exact;
            exact.liquidity = l;
            CHECK(pre_trade_pool_price(s, exact) == doctest::Approx(2500.0).epsilon(1e-10));
            // Without L the fee-exclusive execution price is used; its error is
            // the price impact, about size / x with x = L / sqrt(P) base reserves.
            const double approx = pre_trade_pool_price(s, MispriceSettings{});
            CHECK(std::abs(approx / 2500.0 - 1.0) < 3.0 * size / (l / 50.0));
        }
    }
}

TEST_CASE("mispricing series against a constant market") {
    const double l = 1.0e6;
    std::vector<PriceTick> ticks;
    for (int k = 0; k < 100; ++k) {
        ticks.push_back({kDay0 + k, "a", 2510.0, 2512.0});
        ticks.push_back({kDay0 + k + 0.5, "b", 2509.0, 2511.0});
    }
    std::vector<SwapRecord> swaps = {
        execute(2500.0, l, 0.5, SwapDirection::BaseToQuote, 0.003, kDay0 + 20.0),
        execute(2520.0, l, 1000.0, SwapDirection::QuoteToBase, 0.003, kDay0 + 40.0),
        execute(2500.0, l, 0.5, SwapDirection::BaseToQuote, 0.003, kDay0 + 500.0),
    };
    MispriceSettings s;
    s.liquidity = l;
    const MispriceSeries series = mispricing_series(swaps, ticks, s);
    CHECK(series.skipped_gaps == 1);
    REQUIRE(series.samples.size() == 2);
    // Sells of base compare against the best ask, buys against the best bid.
    CHECK(series.samples[0].window_best == doctest::Approx(std::log(2511.0 / 2500.0)).epsilon(1e-9));
    CHECK(series.samples[1].window_best == doctest::Approx(std::log(2510.0 / 2520.0)).epsilon(1e-9));
    CHECK(series.samples[0].pre_trade == doctest::Approx(series.samples[0].window_best));
    CHECK(series.samples[1].volume_quote == 1000.0);
}

TEST_CASE("histogram bins, clamping and per-day scaling") {
    const HistogramSpec spec;  // 40 bins over [-0.01, 0.01]
    CHECK(spec.width() == doctest::Approx(0.0005));
    CHECK(spec.index(-0.5) == 0);
    CHECK(spec.index(0.0) == 20);
    CHECK(spec.index(0.5) == 39);
    CHECK(spec.midpoint(20) == doctest::Approx(0.00025));

    std::vector<MispriceSample> samples(3);
    samples[0] = {0, 1, kDay0 + 10, 1.0, 0.0, 0.0001, 100.0};
    samples[1] = {1, 2, kDay0 + 86400 + 10, 1.0, 0.0, 0.0002, 50.0};
    samples[2] = {2, 3, kDay0 + 86400 + 20, 1.0, 0.0, -0.02, 10.0};
    CHECK(distinct_days({kDay0, kDay0 + 86399, kDay0 + 86400}) == 2);
    const auto rows = misprice_histograms(samples, spec);
    REQUIRE(rows.size() == 40);
    CHECK(rows[20].count_per_day == 1.0);
    CHECK(rows[20].volume_per_day == 75.0);
    CHECK(rows[0].count_per_day == 0.5);
    std::ostringstream out;
    write_histogram_csv(out, rows);
    CHECK(out.str().rfind("bin_midpoint,count_per_day,volume_per_day\n", 0) == 0);
    CHECK_THROWS_AS(misprice_histograms({}, spec), InvalidArgument);
}

TEST_CASE("daily activity: volatility, gaps and dates") {
    std::vector<PriceTick> ticks;
    // Day 0: venue a every 30 s with alternating mids; venue b is sparse.
    for (int k = 0; k < 2880; ++k) {
        const double mid = k % 2 ? 101.0 : 100.0;
        ticks.push_back({kDay0 + 30.0 * k, "a", mid - 0.5, mid + 0.5});
    }
    ticks.push_back({kDay0 + 5.0, "b", 1.0, 2.0});
    // Day 1: a two-minute hole.
    for (int k = 0; k < 2880; ++k)
        if (k != 100 && k != 101 && k != 102) ticks.push_back({kDay0 + 86400.0 + 30.0 * k, "a", 99.5, 100.5});
    std::vector<SwapRecord> swaps = {{1, kDay0 + 10, SwapDirection::BaseToQuote, 2.5, 250.0},
                                     {2, kDay0 + 86410, SwapDirection::QuoteToBase, 100.0, 0.9}};
    const ActivityReport rep = daily_activity_report(swaps, ticks, HistogramSpec{0.0, 5.0, 5}, 60.0);
    REQUIRE(rep.days.size() == 2);
    CHECK(rep.days[0].date == "2025-09-01");
    CHECK(rep.days[1].date == "2025-09-02");
    REQUIRE(rep.days[0].volatility_pct);
    const double r = std::log(101.0 / 100.0);
    CHECK(*rep.days[0].volatility_pct == doctest::Approx(100.0 * std::sqrt(2879.0 * r * r)));
    CHECK(rep.days[0].tick_count == 2881);
    CHECK(rep.days[0].max_gap_seconds == 30.0);
    CHECK_FALSE(rep.days[1].volatility_pct);
    CHECK(rep.days[1].max_gap_seconds == 120.0);
    CHECK(rep.amount_counts[2] == 1.0);
    CHECK(rep.amount_counts[0] == 1.0);

    std::ostringstream out;
    write_activity_json(out, rep);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j["days"][1]["volatility_pct"].is_null());
    CHECK(j["days"][0]["swap_count"] == 1);
    CHECK(j["base_amount_histogram"].size() == 5);
}
