#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "arb/calibrate.hpp"
#include "arb/rng.hpp"
#include "arb/simulator.hpp"
#include "doctest.h"

using namespace arb;

namespace {

std::vector<double> normals(std::size_t n, double mean, double sd, std::uint64_t seed) {
    Philox rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = mean + sd * rng.normal();
    return v;
}

double sorted_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ModelParams jump_model() {
    DailyParams d;
    d.sigma_daily = 0.0234;
    d.mu_daily = 0.0677;
    d.step_seconds = 12.0;
    d.q_step = 0.04;
    d.jump_mean_daily = -0.2035;
    d.jump_std_daily = 0.1952;
    return from_daily(d);
}

}  // namespace

TEST_CASE("classification uses the median and the normal-consistent MAD") {
    std::vector<double> r = normals(201, 0.001, 0.01, 5);
    r[3] = 0.2;
    r[70] = -0.15;
    const auto series = ReturnSeries::regular(r, 12.0);
    const Partition p = classify_returns(series, 2.5);
    const double med = sorted_median(r);
    std::vector<double> dev;
    for (double x : r) dev.push_back(std::abs(x - med));
    const double scale = sorted_median(dev) / 0.6744897501960817;
    CHECK(p.center == doctest::Approx(med).epsilon(1e-14));
    CHECK(p.scale == doctest::Approx(scale).epsilon(1e-12));
    CHECK(p.threshold == doctest::Approx(2.5 * scale).epsilon(1e-12));
    CHECK(p.is_jump[3]);
    CHECK(p.is_jump[70]);
    std::size_t jumps = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(p.is_jump[i] == (std::abs(r[i] - med) >= 2.5 * scale));
        jumps += p.is_jump[i];
    }
    CHECK(p.jumps.size() == jumps);
    CHECK(p.diffusive.size() + p.jumps.size() == r.size());
}

TEST_CASE("the pure-diffusion fit converts to daily units") {
    const std::vector<double> r = normals(5000, 2e-5, 3e-4, 9);
    const FitResult f = fit_pure_diffusion(ReturnSeries::regular(r, 12.0));
    CHECK(f.tau == 0.0);
    CHECK(f.q_step == 0.0);
    CHECK(f.sigma_daily == doctest::Approx(sd_of(r) * std::sqrt(7200.0)));
    CHECK(f.mu_daily == doctest::Approx(mean_of(r) * 7200.0));
    // Mean Gaussian log density at the fitted parameters.
    const double s = sd_of(r);
    const double n = static_cast<double>(r.size());
    const double expected = -0.5 * std::log(2.0 * std::numbers::pi * s * s) - 0.5 * (n - 1.0) / n;
    CHECK(f.log_likelihood == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("the raw threshold fit reports the partition statistics") {
    std::vector<double> r = normals(3000, 0.0, 1e-3, 17);
    Philox rng(3);
    for (std::size_t i = 0; i < r.size(); i += 50) r[i] = -0.01 + 0.02 * rng.normal();
    const auto series = ReturnSeries::regular(r, 60.0);
    const Partition p = classify_returns(series, 3.0);
    const FitResult f = fit_params(series, 3.0);
    const double per_day = 86400.0 / 60.0;
    CHECK(f.sigma_daily == doctest::Approx(sd_of(p.diffusive) * std::sqrt(per_day)));
    CHECK(f.mu_daily == doctest::Approx(mean_of(p.diffusive) * per_day));
    CHECK(f.jump_mean_daily == doctest::Approx((mean_of(p.jumps) - mean_of(p.diffusive)) * per_day));
    CHECK(f.jump_std_daily == doctest::Approx(sd_of(p.jumps) * std::sqrt(per_day)));
    CHECK(f.q_step == doctest::Approx(static_cast<double>(p.jumps.size()) / 3000.0));
    CHECK(f.n_jump_obs + f.n_diffusive_obs == 3000);
    CHECK(f.to_params().jump_prob_q == doctest::Approx(f.q_step));
}

TEST_CASE("mixture log-likelihood matches the two-component density") {
    ModelParams m;
    m.mu_step = 1e-4;
    m.sigma_step = 2e-3;
    m.jump_prob_q = 0.07;
    m.jump_mean = -0.01;
    m.jump_std = 0.02;
    const std::vector<double> r = {0.0, 0.003, -0.05, 0.2};
    double total = 0.0;
    for (double x : r) {
        auto pdf = [](double v, double mu, double s) {
            return std::exp(-0.5 * (v - mu) * (v - mu) / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
        };
        total += std::log((1.0 - m.jump_prob_q) * pdf(x, m.mu_step, m.sigma_step) +
                          m.jump_prob_q * pdf(x, m.mu_step + m.jump_mean, std::hypot(m.sigma_step, m.jump_std)));
    }
    CHECK(mixture_log_likelihood(r, m) == doctest::Approx(total / 4.0).epsilon(1e-12));
}

TEST_CASE("the corrected fit recovers a known jump-diffusion") {
    const ModelParams truth = jump_model();
    const auto r = simulate_returns(truth, 400'000, 77);
    const auto series = ReturnSeries::regular(r, 12.0);
    const FitResult f = fit_params_corrected(series, 2.0);
    const DailyParams d = to_daily(truth);
    CHECK(f.sigma_daily == doctest::Approx(d.sigma_daily).epsilon(0.01));
    CHECK(f.q_step == doctest::Approx(0.04).epsilon(0.05));
    CHECK(f.jump_std_daily == doctest::Approx(d.jump_std_daily).epsilon(0.05));
    // The raw fit's diffusive std is biased low by the truncation.
    CHECK(fit_params(series, 2.0).sigma_daily < 0.95 * d.sigma_daily);
}

TEST_CASE("the corrected fit finds at most a negligible jump part in Gaussian data") {
    const auto series = ReturnSeries::regular(normals(20'000, 0.0, 1e-3, 8), 12.0);
    const FitResult pure = fit_pure_diffusion(series);
    for (double tau : {2.0, 3.0}) {
        const FitResult f = fit_params_corrected(series, tau);
        CHECK(f.q_step < 0.02);
        CHECK(f.sigma_daily == doctest::Approx(pure.sigma_daily).epsilon(0.03));
        CHECK(f.log_likelihood >= pure.log_likelihood);
        CHECK(f.log_likelihood - pure.log_likelihood < 1e-3);
    }
}

TEST_CASE("a tau sweep is sorted and picks the best likelihood") {
    const auto series = ReturnSeries::regular(simulate_returns(jump_model(), 50'000, 4), 12.0);
    const TauSweep sweep = tau_sweep(series, {3.0, 1.5, 2.0}, FitMethod::Raw);
    REQUIRE(sweep.fits.size() == 3);
    CHECK(sweep.fits[0].tau == 1.5);
    CHECK(sweep.fits[2].tau == 3.0);
    for (const auto& f : sweep.fits) CHECK(f.log_likelihood <= sweep.fits[sweep.best].log_likelihood);
    CHECK_THROWS_AS(tau_sweep(series, {}), InvalidArgument);
}

TEST_CASE("Kolmogorov survival function") {
    CHECK(kolmogorov_survival(1.3580986393) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(kolmogorov_survival(1.2238478702) == doctest::Approx(0.10).epsilon(1e-4));
    CHECK(kolmogorov_survival(1.6276236115) == doctest::Approx(0.01).epsilon(1e-4));
    // Both series forms agree where they switch.
    CHECK(kolmogorov_survival(1.17999) == doctest::Approx(kolmogorov_survival(1.18001)).epsilon(1e-4));
    CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("moments and the normality test") {
    const MomentStats g = moments_and_ks(normals(20'000, 1.0, 2.0, 21));
    CHECK(g.mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(g.std_dev == doctest::Approx(2.0).epsilon(0.02));
    CHECK(std::abs(g.skewness) < 0.1);
    CHECK(g.kurtosis == doctest::Approx(3.0).epsilon(0.05));
    CHECK(g.ks_p_value > 0.01);

    Philox rng(2);
    std::vector<double> expo(20'000);
    for (double& x : expo) x = -std::log(rng.uniform());
    const MomentStats e = moments_and_ks(expo);
    CHECK(e.skewness == doctest::Approx(2.0).epsilon(0.15));
    CHECK(e.ks_p_value < 1e-6);
    CHECK_THROWS_AS(moments_and_ks({1.0, 2.0}), InvalidArgument);
}

TEST_CASE("price files round trip to log-returns") {
    const std::vector<double> t = {12.0, 24.0, 36.0};
    const std::vector<double> p = {100.0, 101.0, 99.5};
    std::stringstream buf;
    write_price_csv(buf, t, p);
    const ReturnSeries s = read_price_csv(buf, 12.0);
    REQUIRE(s.size() == 2);
    CHECK(s.returns[0] == doctest::Approx(std::log(1.01)));
    CHECK(s.returns[1] == doctest::Approx(std::log(99.5 / 101.0)));
    CHECK(s.timestamps[1] == 36.0);

    std::istringstream bad("timestamp,price\n1,2\n2;3\n");
    CHECK_THROWS_AS(read_price_csv(bad, 12.0), InvalidArgument);
    std::istringstream unordered("1,2\n2,3\n2,4\n");
    CHECK_THROWS_AS(read_price_csv(unordered, 12.0), InvalidArgument);
}

TEST_CASE("fit CSV leaves tau empty for the pure fit") {
    FitResult pure;
    FitResult jump;
    jump.tau = 2.0;
    jump.q_step = 0.04;
    std::ostringstream out;
    write_fit_csv(out, {pure, jump});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau,LL,sigma,mu,mu_J,sigma_J,q");
    std::getline(in, line);
    CHECK(line.front() == ',');
    std::getline(in, line);
    CHECK(line.rfind("2,", 0) == 0);
    CHECK(line.substr(line.rfind(',') + 1) == "0.04");
}
