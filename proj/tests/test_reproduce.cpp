#include <cmath>
#include <sstream>
#include <string>

#include "arb/reference_tables.hpp"
#include "arb/reproduce.hpp"
#include "doctest.h"

using namespace arb;

TEST_CASE("block-time labels") {
    CHECK(parse_step_label("2sec") == 2.0);
    CHECK(parse_step_label("12s") == 12.0);
    CHECK(parse_step_label("10min") == 600.0);
    CHECK(parse_step_label("2m") == 120.0);
    CHECK_THROWS_AS(parse_step_label("12h"), InvalidArgument);
    CHECK_THROWS_AS(parse_step_label("sec"), InvalidArgument);
    CHECK(step_label(600.0) == "10min");
    CHECK(step_label(12.0) == "12sec");
    CHECK(step_label(90.0) == "90sec");
}

TEST_CASE("cell filters") {
    const CellFilter all = CellFilter::parse("");
    CHECK(all.empty());
    CHECK(all.keeps(2.0, 100.0));
    const CellFilter f = CellFilter::parse("12sec:30bp,10min:1");
    CHECK(f.keeps(12.0, 30.0));
    CHECK(f.keeps(600.0, 1.0));
    CHECK_FALSE(f.keeps(12.0, 1.0));
    CHECK_THROWS_AS(CellFilter::parse("12sec"), InvalidArgument);
    CHECK_THROWS_AS(CellFilter::parse("12sec:abc"), InvalidArgument);
}

TEST_CASE("table parameters follow the time scaling") {
    ReproduceSettings s;
    s.jump_mean_daily = -0.2;
    s.jump_std_daily = 0.2;
    const ModelParams a = table_params(12.0, 0.0, s);
    CHECK(a.sigma_step == doctest::Approx(0.05 / std::sqrt(7200.0)));
    CHECK(a.mu_step == doctest::Approx(0.00125 / 7200.0));
    CHECK(a.arrival_prob_p == 1.0);
    CHECK(a.jump_prob_q == 0.0);
    const ModelParams b = table_params(120.0, 0.1, s);
    CHECK(b.jump_prob_q == 0.1);
    CHECK(b.jump_mean == doctest::Approx(-0.2 / 720.0));
    CHECK(b.jump_std == doctest::Approx(0.2 / std::sqrt(720.0)));
}

TEST_CASE("a trade-region cell is computed against its reference") {
    ReproduceSettings s;
    s.n_points = 401;
    s.trade_iterations = 3000;
    const TradeRegionCell c = compute_trade_region_cell(2, 3, s);  // 12 s, 30 bp
    CHECK(c.step_seconds == 12.0);
    CHECK(c.gamma_bp == 30.0);
    CHECK(c.reference_pct == 12.3);
    CHECK(c.tolerance_pp == 0.5);
    CHECK(c.computed_pct == doctest::Approx(12.3).epsilon(0.05));
    CHECK(c.converged);
    CHECK_THROWS_AS(compute_trade_region_cell(4, 0, s), InvalidArgument);
}

TEST_CASE("profit cells carry their tolerance") {
    ReproduceSettings s;
    s.n_points = 201;
    s.profit_iterations = 50;
    const ProfitCell c = compute_profit_cell(1, 2, 3, s);
    CHECK(c.reference == reference::kArbProfit[1][2][3]);
    CHECK(c.tolerance() == doctest::Approx(0.05 * c.reference));
    CHECK(c.computed > 0.0);
    CHECK(c.iterations <= 50);
    ProfitCell tiny;
    tiny.reference = 0.0;
    tiny.computed = 5e-9;
    CHECK(tiny.pass());
    CHECK_THROWS_AS(compute_profit_cell(0, 4, 0, s), InvalidArgument);
}

TEST_CASE("settings validation") {
    ReproduceSettings s;
    s.n_points = 400;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = ReproduceSettings{};
    s.theta = 1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("table CSV headers") {
    TradeRegionCell t;
    t.step_seconds = 120.0;
    t.gamma_bp = 5.0;
    t.reference_pct = 72.5;
    t.computed_pct = 72.25;
    std::ostringstream a;
    write_trade_region_csv(a, {t});
    CHECK(a.str() ==
          "step,gamma_bp,reference_pct,published_pct,computed_pct,abs_error_pp,tolerance_pp,iterations,converged\n"
          "2min,5,72.5,0.0,72.2500,0.2500,0,0,0\n");
    ProfitCell p;
    std::ostringstream b;
    write_profit_csv(b, {p});
    CHECK(b.str().rfind("step,q,gamma_bp,reference,computed,ratio,iterations,converged\n", 0) == 0);
}
