#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "arb/kernel.hpp"

namespace arb {

enum class InitialGuess { Window, Dirac };

struct SolveSettings {
    std::size_t n_points = 201;
    std::size_t max_iterations = 1000;
    double l1_tolerance = 1e-10;
    std::optional<double> grid_halfwidth;  // auto when empty
    InitialGuess initial = InitialGuess::Window;
    unsigned threads = 1;

    void validate() const;
};

struct ConvergenceTrace {
    std::vector<double> l1_distances;     // L1(f_{k+1}, f_k), k = 0, 1, ...
    std::vector<double> truncation_loss;  // 1 - pre-normalization mass
    std::size_t iterations = 0;
    bool converged = false;
    double final_normalization = 1.0;
};

struct StationaryResult {
    DensityGrid density;
    ConvergenceTrace trace;
};

// Symmetric grid [-H, H] sized from the band and the per-step dispersion.
GridSpec auto_grid(const ModelParams& params, const FeeBand& band, const SolveSettings& settings);

// Window (indicator of the band) or Dirac-at-centre starting density.
DensityGrid initial_density(const FeeBand& band, const GridSpec& grid, InitialGuess kind = InitialGuess::Window);

// The transition kernel discretized on a grid: f_{k+1} = M f_k, with f_k
// linear between nodes and each cell integrated by one or more GK15 panels.
class TransitionOperator {
public:
    TransitionOperator(const GridSpec& grid, const ModelParams& params, const FeeBand& band);

    struct Step {
        DensityGrid density;  // normalized
        double mass = 0.0;    // integral before normalization
    };
    Step apply(const DensityGrid& f, unsigned threads = 1) const;

    const GridSpec& grid() const { return grid_; }
    std::size_t panels_per_cell() const { return panels_; }
    double matrix(std::size_t row, std::size_t col) const { return m_[row * grid_.n_points + col]; }

private:
    GridSpec grid_;
    std::size_t panels_ = 1;
    std::vector<double> m_;  // row-major, rows = target nodes
};

DensityGrid iterate_once(const DensityGrid& f, const ModelParams& params, const FeeBand& band);

StationaryResult solve_stationary(const ModelParams& params, const FeeBand& band, const SolveSettings& settings);

// Trapezoid integral of |f - g|.
double l1_distance(const DensityGrid& f, const DensityGrid& g);

void write_density_csv(std::ostream& out, const DensityGrid& f);
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
DensityGrid read_density_csv(std::istream& in);

}  // namespace arb
