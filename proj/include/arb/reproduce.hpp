#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "arb/kernel.hpp"

namespace arb {

// Solver settings shared by the trade-region and profit tables.
struct ReproduceSettings {
    std::size_t n_points = 801;
    std::size_t trade_iterations = 8000;
    std::size_t profit_iterations = 1000;
    double l1_tolerance = 1e-13;
    std::shared_ptr<const NoiseLaw> noise = std::make_shared<const LaplaceNoise>();
    double jump_mean_daily = 0.0;  // jump law of the q > 0 rows
    double jump_std_daily = 0.0;
    double theta = 0.5;
    unsigned threads = 1;

    void validate() const;
};

// Base table parameters (5% daily volatility, drift sigma^2/2, p = 1).
ModelParams table_params(double step_seconds, double q, const ReproduceSettings& settings);

struct TradeRegionCell {
    std::size_t step_index = 0;
    std::size_t gamma_index = 0;
    double step_seconds = 0.0;
    double gamma_bp = 0.0;
    double reference_pct = 0.0;
    double published_pct = 0.0;
    double computed_pct = 0.0;
    double tolerance_pp = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    double abs_error_pp() const;
    bool pass() const { return abs_error_pp() <= tolerance_pp; }
};

struct ProfitCell {
    std::size_t step_index = 0;
    std::size_t q_index = 0;
    std::size_t gamma_index = 0;
    double step_seconds = 0.0;
    double q = 0.0;
    double gamma_bp = 0.0;
    double reference = 0.0;
    double computed = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    double tolerance() const;
    bool pass() const;
};

TradeRegionCell compute_trade_region_cell(std::size_t step_index, std::size_t gamma_index,
                                          const ReproduceSettings& settings);
ProfitCell compute_profit_cell(std::size_t step_index, std::size_t q_index, std::size_t gamma_index,
                               const ReproduceSettings& settings);

// Cell selector such as "12sec:30bp,10min:1bp"; an empty selector keeps
// every cell. Step labels accept s/sec/min suffixes.
class CellFilter {
public:
    static CellFilter parse(const std::string& text);
    bool keeps(double step_seconds, double gamma_bp) const;
    bool empty() const { return cells_.empty(); }

private:
    std::vector<std::pair<double, double>> cells_;
};

// Seconds from a label like "2sec", "12s", "10min".
double parse_step_label(const std::string& label);
std::string step_label(double step_seconds);

void write_trade_region_csv(std::ostream& out, const std::vector<TradeRegionCell>& cells);
void write_profit_csv(std::ostream& out, const std::vector<ProfitCell>& cells);

}  // namespace arb
