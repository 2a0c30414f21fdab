#include <sstream>

#include "arb/config.hpp"
#include "doctest.h"

using namespace arb;

namespace {

KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return KeyValueConfig::parse(in, "test");
}

const char* kModel =
    "mu_daily = 0.00125\nsigma_daily = 0.05\nq_step = 0.1\njump_mean_daily = -0.2\n"
    "jump_std_daily = 0.2\np = 1\nstep_seconds = 12\ngamma_bp = 30\ngamma_cex_bp = 5\n";

}  // namespace

TEST_CASE("comments, blank lines and later overrides") {
    const auto cfg = parse("# header\n\na = 1\nb = two # trailing\na = 3\n");
    CHECK(cfg.get_double("a") == 3.0);
    CHECK(cfg.get("b") == "two");
    CHECK_FALSE(cfg.has("c"));
    CHECK(cfg.get_double_or("c", 7.0) == 7.0);
}

TEST_CASE("malformed lines and missing or non-numeric keys raise ConfigError") {
    CHECK_THROWS_AS(parse("just text\n"), ConfigError);
    CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
    const auto cfg = parse("x = abc\n");
    CHECK_THROWS_AS(cfg.get_double("x"), ConfigError);
    CHECK_THROWS_AS(cfg.get("y"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("model and band keys build validated parameters") {
    const auto cfg = parse(kModel);
    const ModelParams m = model_params_from_config(cfg);
    CHECK(m.jump_prob_q == 0.1);
    CHECK(m.step_seconds == 12.0);
    CHECK(m.noise_law().name() == "gaussian");
    const FeeBand band = fee_band_from_config(cfg);
    CHECK(band.upper_edge() == doctest::Approx(0.0035));
    CHECK(band.lower_edge() == doctest::Approx(-0.0035));
}

TEST_CASE("noise law selection") {
    auto cfg = parse(kModel);
    cfg.set("noise", "laplace");
    CHECK(model_params_from_config(cfg).noise_law().name() == "laplace");
    cfg.set("noise", "student_t");
    CHECK_THROWS_AS(model_params_from_config(cfg), ConfigError);  // needs noise_dof
    cfg.set("noise_dof", 4.0);
    CHECK(model_params_from_config(cfg).noise_law().name() == "student_t");
    cfg.set("noise", "cauchy");
    CHECK_THROWS_AS(model_params_from_config(cfg), ConfigError);
}

TEST_CASE("invalid values surface as ConfigError") {
    auto cfg = parse(kModel);
    cfg.set("p", 0.0);
    CHECK_THROWS_AS(model_params_from_config(cfg), ConfigError);
    cfg = parse(kModel);
    cfg.set("gamma_bp", -1.0);
    CHECK_THROWS_AS(fee_band_from_config(cfg), ConfigError);
}

TEST_CASE("put/get round trip keeps the parameters") {
    const auto cfg = parse(kModel);
    const ModelParams m = model_params_from_config(cfg);
    const FeeBand band = fee_band_from_config(cfg);
    KeyValueConfig out;
    put_model_params(out, m);
    put_fee_band(out, band);
    std::ostringstream text;
    out.write(text);
    const auto back = parse(text.str());
    const ModelParams m2 = model_params_from_config(back);
    CHECK(m2.sigma_step == doctest::Approx(m.sigma_step).epsilon(1e-12));
    CHECK(m2.jump_mean == doctest::Approx(m.jump_mean).epsilon(1e-12));
    CHECK(fee_band_from_config(back).upper_edge() == doctest::Approx(band.upper_edge()).epsilon(1e-12));
}
