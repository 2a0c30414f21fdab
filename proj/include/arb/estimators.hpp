#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arb/kernel.hpp"

namespace arb {

// Pool description. When both mid_price_w and liquidity_l are given they must
// agree with tvl through the pool-value identity; otherwise L*W^theta is
// derived from tvl.
struct PoolSpec {
    double tvl = 1.0;
    double gamma_bp = 30.0;
    double theta = 0.5;
    std::optional<double> mid_price_w;
    std::optional<double> liquidity_l;

    void validate() const;
    // L * W^theta, the scale of the CFMM profit expression.
    double scale() const;
};

struct ArbReport {
    double trade_probability = 0.0;
    double profit_per_step = 0.0;
    double volume_per_step = 0.0;
    double daily_profit = 0.0;
    double daily_volume = 0.0;
    double expected_count_up = 0.0;
    double expected_count_down = 0.0;
    double step_seconds = 12.0;
};

// c1 = (theta/(1-theta))^(1-theta), c2 = ((1-theta)/theta)^theta.
std::pair<double, double> cfmm_constants(double theta);

// Per-event quantities at pre-trade mispricing t, in units of TVL for the
// CPMM (profit, volume) and of L*W^theta for the CFMM. Zero inside the band.
double cpmm_profit_integrand(double t, double gamma);
double cpmm_volume_integrand(double t, double gamma);
double cfmm_profit_integrand(double t, double gamma, double theta);

// Integral of g * f over (-inf, lo_edge] and [hi_edge, inf): trapezoid on the
// nodes, with the cell containing each edge split at the edge by linear
// interpolation of f.
double tail_integral(const DensityGrid& f, double edge, bool upper, const std::function<double(double)>& g);

double trade_region_mass(const DensityGrid& f_star, const FeeBand& band);
double upper_tail_mass(const DensityGrid& f_star, const FeeBand& band);
double lower_tail_mass(const DensityGrid& f_star, const FeeBand& band);

double expected_profit_cpmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool);
double expected_volume_cpmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool);
double expected_profit_cfmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool);
// The CFMM profit without the L*W^theta factor (the tabulated "ARB" value).
double arb_profit_ratio(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, double theta);

struct TradeCounts {
    double up_per_day = 0.0;
    double down_per_day = 0.0;
};
TradeCounts expected_counts(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params);

ArbReport make_report(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool);

struct MixtureFit {
    std::vector<double> weights;
    double residual = 0.0;  // ||sum w_g f_g - hist||_2 over nodes
    bool degenerate = false;
};

// Nonnegative weights summing to one minimizing the node-wise least squares
// misfit between the combined density and the empirical histogram.
MixtureFit spread_mixture_fit(const std::vector<std::pair<double, DensityGrid>>& components, const DensityGrid& empirical);

void write_report_json(std::ostream& out, const ArbReport& report);

}  // namespace arb
