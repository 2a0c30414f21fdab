#include <cmath>
#include <memory>
#include <numbers>

#include "arb/kernel.hpp"
#include "doctest.h"

using namespace arb;

namespace {

double normal_pdf(double x, double m, double s) {
    const double z = (x - m) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

// Brute-force density of mu + sigma*eps + U by a fine trapezoid over u.
template <class NoisePdf>
double brute_convolution(double y, double mu, double sigma, double jm, double js, NoisePdf noise_pdf) {
    const double lo = jm - 12.0 * js;
    const double hi = jm + 12.0 * js;
    const int n = 200000;
    const double h = (hi - lo) / n;
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = lo + h * i;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        total += w * normal_pdf(u, jm, js) * noise_pdf((y - mu - u) / sigma) / sigma;
    }
    return total * h;
}

template <class F>
double trapezoid(F f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double total = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) total += f(lo + h * i);
    return total * h;
}

ModelParams jump_params() {
    ModelParams m;
    m.mu_step = 2e-5;
    m.sigma_step = 1e-3;
    m.jump_prob_q = 0.2;
    m.jump_mean = -3e-3;
    m.jump_std = 2e-3;
    return m;
}

}  // namespace

TEST_CASE("gaussian jump branch agrees with a brute-force convolution") {
    const ModelParams m = jump_params();
    const auto gauss = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    for (double y : {-0.01, -0.004, -0.003, 0.0, 0.002, 0.006}) {
        const double oracle = brute_convolution(y, m.mu_step, m.sigma_step, m.jump_mean, m.jump_std, gauss);
        const double jump_branch = (increment_density(y, m) - (1.0 - m.jump_prob_q) * normal_pdf(y, m.mu_step, m.sigma_step)) /
                                   m.jump_prob_q;
        CHECK(jump_branch == doctest::Approx(oracle).epsilon(1e-7));
        CHECK(std::exp(log_jump_convolution_numeric(y, m)) == doctest::Approx(oracle).epsilon(1e-7));
    }
}

TEST_CASE("laplace jump branch agrees with a brute-force convolution") {
    ModelParams m = jump_params();
    m.noise = std::make_shared<const LaplaceNoise>();
    const auto laplace = [](double z) { return std::exp(-std::numbers::sqrt2 * std::abs(z)) / std::numbers::sqrt2; };
    for (double y : {-0.008, -0.003, 0.0, 0.004}) {
        const double oracle = brute_convolution(y, m.mu_step, m.sigma_step, m.jump_mean, m.jump_std, laplace);
        CHECK(std::exp(log_jump_convolution_numeric(y, m)) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("increment densities integrate to one for every noise law") {
    for (int law = 0; law < 3; ++law) {
        ModelParams m = jump_params();
        if (law == 1) m.noise = std::make_shared<const LaplaceNoise>();
        if (law == 2) m.noise = std::make_shared<const StudentTNoise>(4.0);
        const double mass = trapezoid([&](double y) { return increment_density(y, m); }, -0.2, 0.2, 400000);
        INFO("law " << law);
        // The trapezoid oracle itself is only second order at the Laplace cusp.
        CHECK(std::abs(mass - 1.0) < (law == 0 ? 1e-9 : 1e-6));
    }
}

TEST_CASE("noise laws are standardized") {
    const LaplaceNoise laplace;
    const StudentTNoise t5(5.0);
    for (const NoiseLaw* law : {static_cast<const NoiseLaw*>(&laplace), static_cast<const NoiseLaw*>(&t5)}) {
        const auto pdf = [law](double z) { return std::exp(law->log_pdf(z)); };
        CHECK(trapezoid(pdf, -200.0, 200.0, 2000000) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(trapezoid([&](double z) { return z * z * pdf(z); }, -2000.0, 2000.0, 4000000) ==
              doctest::Approx(1.0).epsilon(law == &t5 ? 2e-3 : 1e-6));
    }
    Philox rng(3);
    double m2 = 0.0, mabs = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = laplace.sample(rng);
        m2 += z * z;
        mabs += std::abs(z);
    }
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(mabs / n == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(0.01));
}

TEST_CASE("log-space evaluation stays finite for tiny volatility") {
    ModelParams m;
    m.sigma_step = 1e-9;
    m.mu_step = 0.0;
    const double y = 5e-8;  // 50 standard deviations
    const double expected = -0.5 * 2500.0 - std::log(1e-9) - 0.5 * std::log(2.0 * std::numbers::pi);
    CHECK(log_increment_density(y, m) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::isfinite(log_increment_density(1e-3, m)));
}

TEST_CASE("transition density clamps outside the band with probability p") {
    ModelParams m = jump_params();
    m.arrival_prob_p = 0.3;
    const FeeBand band = FeeBand::symmetric_bp(30);
    SUBCASE("inside the band the kernel is a pure shift") {
        for (double x : {-0.003, 0.0, 0.001, 0.003})
            CHECK(transition_density(x, 0.0021, m, band) == doctest::Approx(increment_density(0.0021 - x, m)));
    }
    SUBCASE("outside the band it mixes the shifted and clamped kernels") {
        const double x = 0.01;
        const double y = 0.004;
        const double expected = 0.7 * increment_density(y - x, m) + 0.3 * increment_density(y - 0.003, m);
        CHECK(transition_density(x, y, m, band) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("with p = 1 the lower tail is projected onto the lower edge") {
        m.arrival_prob_p = 1.0;
        CHECK(transition_density(-0.02, 0.001, m, band) == doctest::Approx(increment_density(0.004, m)));
    }
}

TEST_CASE("clamp projects onto the closed band including the spread add-on") {
    const FeeBand band = FeeBand::symmetric_bp(30, 10);
    CHECK(clamp_to_band(0.01, band) == doctest::Approx(0.004));
    CHECK(clamp_to_band(-0.01, band) == doctest::Approx(-0.004));
    CHECK(clamp_to_band(0.001, band) == 0.001);
    CHECK(band.contains(band.upper_edge()));
    CHECK(band.contains(band.lower_edge()));
    CHECK_FALSE(band.contains(0.0041));
}

TEST_CASE("daily and per-step parameters convert with time and square-root-time scaling") {
    DailyParams d;
    d.mu_daily = 0.05;
    d.sigma_daily = 0.04;
    d.q_step = 0.03;
    d.jump_mean_daily = -0.2;
    d.jump_std_daily = 0.2;
    d.step_seconds = 12.0;
    const ModelParams m = from_daily(d);
    const double r = 12.0 / 86400.0;
    CHECK(m.mu_step == doctest::Approx(0.05 * r));
    CHECK(m.sigma_step == doctest::Approx(0.04 * std::sqrt(r)));
    CHECK(m.jump_mean == doctest::Approx(-0.2 * r));
    CHECK(m.jump_std == doctest::Approx(0.2 * std::sqrt(r)));
    CHECK(m.jump_prob_q == 0.03);
    const DailyParams back = to_daily(m);
    CHECK(back.sigma_daily == doctest::Approx(0.04));
    CHECK(back.jump_mean_daily == doctest::Approx(-0.2));
}

TEST_CASE("invalid parameters are rejected") {
    ModelParams m;
    m.sigma_step = 0.0;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m = ModelParams{};
    m.jump_prob_q = 1.0;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m = ModelParams{};
    m.arrival_prob_p = 0.0;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    CHECK_THROWS_AS(StudentTNoise(2.0), InvalidArgument);
    CHECK_THROWS_AS(FeeBand::symmetric_bp(0.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(DensityGrid(GridSpec{-1.0, 1.0, 4}), InvalidArgument);
}

TEST_CASE("density grid interpolation and integrals") {
    DensityGrid f(GridSpec{-1.0, 1.0, 5});
    for (std::size_t j = 0; j < 5; ++j) f[j] = 1.0 - std::abs(f.node(j));  // triangle
    CHECK(f.integral() == doctest::Approx(1.0));
    CHECK(f.value_at(0.25) == doctest::Approx(0.75));
    CHECK(f.value_at(1.5) == 0.0);
    CHECK(f.integral(-0.25, 0.25) == doctest::Approx(0.4375));
    f[2] = 3.0;
    const double before = f.normalize();
    CHECK(before == doctest::Approx(2.0));
    CHECK(f.integral() == doctest::Approx(1.0));
    DensityGrid zero(GridSpec{-1.0, 1.0, 5});
    CHECK_THROWS_AS(zero.normalize(), NumericalError);
}
