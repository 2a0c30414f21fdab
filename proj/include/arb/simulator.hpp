#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "arb/kernel.hpp"

namespace arb {

struct SimSettings {
    std::uint64_t n_steps = 1'000'000;
    std::uint64_t burn_in = 10'000;
    std::uint64_t seed = 0;
    unsigned paths = 1;    // independent paths, each n_steps / paths long
    unsigned threads = 1;  // never affects the result
    std::size_t batches = 50;  // batch means for standard errors
    double tvl = 1.0;          // scales the booked profit and volume

    void validate() const;
};

// Sample averages along the clamped chain, with batch-means standard errors.
struct SimResult {
    DensityGrid empirical_density;  // histogram of the pre-clamp states, as a density
    double realized_profit_per_step = 0.0;
    double realized_volume_per_step = 0.0;
    double profit_stderr = 0.0;
    double volume_stderr = 0.0;
    double upper_tail_frequency = 0.0;
    double lower_tail_frequency = 0.0;
    double tail_stderr = 0.0;
    std::uint64_t steps = 0;  // accumulated steps (after burn-in)
    std::uint64_t seed = 0;

    double trade_frequency() const { return upper_tail_frequency + lower_tail_frequency; }
};

// One step of the chain from pre-clamp state x: clamp with probability p when
// x is outside the band, then add mu + sigma*eps + Z*U.
double chain_step(double x, const ModelParams& params, const FeeBand& band, Philox& rng, bool& clamped);

// Simulates the chain from x = 0. The histogram counts each visited state in
// the grid cell centred on its nearest node (cells of width spacing, half
// cells at the ends); states beyond the grid are counted in the frequencies
// but not in the histogram.
SimResult simulate_chain(const ModelParams& params, const FeeBand& band, const SimSettings& settings, const GridSpec& bins);

// Per-step increments of the free chain (no band), for calibration tests.
std::vector<double> simulate_returns(const ModelParams& params, std::size_t n, std::uint64_t seed);

struct LlnEstimate {
    double sample_mean = 0.0;
    double stationary_mean = 0.0;
    double gap = 0.0;
};

// Both sides of the law of large numbers for a grid function phi: the
// histogram average and the trapezoid integral of phi * f_star.
LlnEstimate lln_estimate(const SimResult& sim, const DensityGrid& f_star, const std::function<double(double)>& phi);

// L1 distance between f_star and the empirical density after aggregating
// both into `coarse` equal-width bins over the common grid.
double binned_l1(const DensityGrid& f_star, const DensityGrid& empirical, std::size_t coarse);

void write_sim_json(std::ostream& out, const SimResult& sim);

}  // namespace arb
