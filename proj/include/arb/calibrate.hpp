#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "arb/kernel.hpp"

namespace arb {

// Log-returns sampled at a fixed interval.
struct ReturnSeries {
    std::vector<double> timestamps;  // seconds, end of each return interval
    std::vector<double> returns;
    double interval_seconds = 12.0;

    void validate() const;
    std::size_t size() const { return returns.size(); }

    // Returns with synthetic timestamps k * interval.
    static ReturnSeries regular(std::vector<double> returns, double interval_seconds);
    // Log-returns of consecutive prices.
    static ReturnSeries from_prices(const std::vector<double>& timestamps, const std::vector<double>& prices,
                                    double interval_seconds);
};

struct Partition {
    std::vector<double> diffusive;
    std::vector<double> jumps;
    std::vector<bool> is_jump;  // per observation
    double center = 0.0;        // median of the returns
    double scale = 0.0;         // robust volatility pre-estimate (1.4826 * MAD)
    double threshold = 0.0;     // tau * scale
};

// Jump if |r - median| >= tau * sigma_hat, with sigma_hat the normal-consistent
// median absolute deviation of all returns.
Partition classify_returns(const ReturnSeries& series, double tau);

// One row of the threshold fit, in daily units (drift and jump mean scale
// linearly with time, volatility and jump std with its square root).
struct FitResult {
    double tau = 0.0;  // 0 for the pure-diffusion fit
    double log_likelihood = 0.0;  // mean per observation
    double sigma_daily = 0.0;
    double mu_daily = 0.0;
    double jump_mean_daily = 0.0;
    double jump_std_daily = 0.0;
    double q_step = 0.0;
    std::size_t n_jump_obs = 0;
    std::size_t n_diffusive_obs = 0;
    double interval_seconds = 12.0;

    ModelParams to_params() const;
};

// Mean log density per observation of the step-return mixture
// (1-q) N(mu, sigma^2) + q N(mu + mu_J, sigma^2 + sigma_J^2).
double mixture_log_likelihood(const std::vector<double>& returns, const ModelParams& step_params);

// Gaussian fit to all returns (q = 0).
FitResult fit_pure_diffusion(const ReturnSeries& series);

// Two-stage threshold fit: mean/std of the diffusive partition, mean (less the
// diffusive mean) and std of the jump partition, q = jump fraction. Falls
// back to the pure-diffusion fit when fewer than two jumps are found.
FitResult fit_params(const ReturnSeries& series, double tau);

// Threshold fit corrected for the classification errors the raw fit makes:
// the diffusive std is de-truncated, and the jump law and q are solved from
// the count and first two moments of the outliers after removing the
// expected Gaussian false positives. Returns the pure-diffusion fit if the
// correction finds no jump component or does not improve the likelihood.
FitResult fit_params_corrected(const ReturnSeries& series, double tau);

enum class FitMethod { Raw, Corrected };

struct TauSweep {
    std::vector<FitResult> fits;
    std::size_t best = 0;  // argmax of log_likelihood, ties to the smaller tau
};

TauSweep tau_sweep(const ReturnSeries& series, const std::vector<double>& taus, FitMethod method = FitMethod::Raw);

struct MomentStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;  // raw, 3 for a Gaussian
    double ks_statistic = 0.0;
    double ks_p_value = 0.0;
};

// Sample moments and a Kolmogorov-Smirnov test against the Gaussian with the
// sample mean and std (asymptotic distribution, no Lilliefors correction).
MomentStats moments_and_ks(const std::vector<double>& x);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Price file with header `timestamp,price`; returns the log-returns of
// consecutive rows.
ReturnSeries read_price_csv(std::istream& in, double interval_seconds);
void write_price_csv(std::ostream& out, const std::vector<double>& timestamps, const std::vector<double>& prices);

// Columns: tau,LL,sigma,mu,mu_J,sigma_J,q (tau empty for the pure fit).
void write_fit_csv(std::ostream& out, const std::vector<FitResult>& fits);

}  // namespace arb
