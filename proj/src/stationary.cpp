#include "arb/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "arb/quadrature.hpp"

namespace arb {

namespace {

// Node positions closer than this fraction of a cell to a band edge are
// treated as lying on the edge.
constexpr double kEdgeSnap = 1e-9;

double kernel(double y, const ModelParams& params) { return std::exp(log_increment_density(y, params)); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void SolveSettings::validate() const {
    if (n_points < 3 || n_points % 2 == 0)
        throw InvalidArgument("n_points must be odd and >= 3, got " + std::to_string(n_points));
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(l1_tolerance > 0.0)) throw InvalidArgument("l1_tolerance must be positive");
    if (grid_halfwidth && !(*grid_halfwidth > 0.0)) throw InvalidArgument("grid_halfwidth must be positive");
}

GridSpec auto_grid(const ModelParams& params, const FeeBand& band, const SolveSettings& settings) {
    const double gamma = std::max(band.upper_edge(), -band.lower_edge());
    double half;
    if (settings.grid_halfwidth) {
        half = *settings.grid_halfwidth;
    } else {
        // Six standard deviations of the widest increment branch. The jump
        // branch is rare but carries most of the tail profit, so it must not
        // be averaged down by q.
        double reach = 6.0 * params.sigma_step;
        if (params.jump_prob_q > 0.0)
            reach = std::max(reach, std::abs(params.jump_mean) + 6.0 * std::hypot(params.sigma_step, params.jump_std));
        half = std::max(2.0 * gamma, gamma + reach);
    }
    return GridSpec{-half, half, settings.n_points};
}

DensityGrid initial_density(const FeeBand& band, const GridSpec& grid, InitialGuess kind) {
    band.validate();
    if (!(grid.lower < band.lower_edge() && grid.upper > band.upper_edge()))
        throw InvalidArgument("grid [" + fmt(grid.lower) + ", " + fmt(grid.upper) + "] does not cover the band");
    DensityGrid f(grid);
    if (kind == InitialGuess::Dirac) {
        f[grid.n_points / 2] = 1.0 / grid.spacing();
        return f;
    }
    const double snap = kEdgeSnap * grid.spacing();
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double x = grid.node(j);
        if (x >= band.lower_edge() - snap && x <= band.upper_edge() + snap) f[j] = 1.0;
    }
    f.normalize();
    return f;
}

TransitionOperator::TransitionOperator(const GridSpec& grid, const ModelParams& params, const FeeBand& band)
    : grid_(grid) {
    grid.validate();
    params.validate();
    band.validate();
    if (!(grid.lower < band.lower_edge() && grid.upper > band.upper_edge()))
        throw InvalidArgument("grid does not cover the band");

    const std::size_t n = grid.n_points;
    const double h = grid.spacing();
    const double a = band.lower_edge();
    const double b = band.upper_edge();
    const double p = params.arrival_prob_p;

    // One GK15 panel per cell unless the cell is wider than the noise scale.
    panels_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h / params.sigma_step)));
    static constexpr quad::Rule rule = quad::unit_rule();
    std::vector<double> s_nodes;
    std::vector<double> s_weights;
    for (std::size_t r = 0; r < panels_; ++r) {
        for (std::size_t k = 0; k < quad::kPoints; ++k) {
            s_nodes.push_back((static_cast<double>(r) + rule.nodes[k]) / static_cast<double>(panels_));
            s_weights.push_back(rule.weights[k] / static_cast<double>(panels_));
        }
    }

    // Free-kernel moments of a full cell against the two hat functions; they
    // depend only on the index offset d = target - cell.
    const std::size_t offsets = 2 * n - 1;
    std::vector<double> left(offsets, 0.0);
    std::vector<double> right(offsets, 0.0);
    for (std::size_t k = 0; k < offsets; ++k) {
        const double d = static_cast<double>(k) - static_cast<double>(n - 1);
        double lsum = 0.0;
        double rsum = 0.0;
        for (std::size_t m = 0; m < s_nodes.size(); ++m) {
            const double kv = kernel((d - s_nodes[m]) * h, params);
            lsum += s_weights[m] * (1.0 - s_nodes[m]) * kv;
            rsum += s_weights[m] * s_nodes[m] * kv;
        }
        left[k] = lsum * h;
        right[k] = rsum * h;
    }

    std::vector<double> to_upper(n);
    std::vector<double> to_lower(n);
    for (std::size_t j = 0; j < n; ++j) {
        to_upper[j] = kernel(grid.node(j) - b, params);
        to_lower[j] = kernel(grid.node(j) - a, params);
    }

    m_.assign(n * n, 0.0);
    const double snap = kEdgeSnap * h;
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double lo = grid.node(c);
        const double hi = grid.node(c + 1);

        std::vector<double> cuts{lo};
        for (double e : {a, b})
            if (e > lo + snap && e < hi - snap) cuts.push_back(e);
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        const bool whole = cuts.size() == 2;

        for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
            const double l = cuts[piece];
            const double r = cuts[piece + 1];
            const double mid = 0.5 * (l + r);
            const bool above = mid > b;
            const bool below = mid < a;
            const double free_weight = (above || below) ? 1.0 - p : 1.0;

            if (free_weight > 0.0) {
                if (whole) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const std::size_t k = j + (n - 1) - c;
                        m_[j * n + c] += free_weight * left[k];
                        m_[j * n + c + 1] += free_weight * right[k];
                    }
                } else {
                    const double width = r - l;
                    for (std::size_t j = 0; j < n; ++j) {
                        double lsum = 0.0;
                        double rsum = 0.0;
                        for (std::size_t m = 0; m < s_nodes.size(); ++m) {
                            const double x0 = l + width * s_nodes[m];
                            const double t = (x0 - lo) / h;
                            const double kv = kernel(grid.node(j) - x0, params);
                            lsum += s_weights[m] * (1.0 - t) * kv;
                            rsum += s_weights[m] * t * kv;
                        }
                        m_[j * n + c] += free_weight * lsum * width;
                        m_[j * n + c + 1] += free_weight * rsum * width;
                    }
                }
            }
            if (above || below) {
                // Mass of the piece against each hat function, moved to the edge.
                const double tl = (l - lo) / h;
                const double tr = (r - lo) / h;
                const double w_left = 0.5 * (r - l) * ((1.0 - tl) + (1.0 - tr));
                const double w_right = 0.5 * (r - l) * (tl + tr);
                const std::vector<double>& edge = above ? to_upper : to_lower;
                for (std::size_t j = 0; j < n; ++j) {
                    m_[j * n + c] += p * edge[j] * w_left;
                    m_[j * n + c + 1] += p * edge[j] * w_right;
                }
            }
        }
    }
}

TransitionOperator::Step TransitionOperator::apply(const DensityGrid& f, unsigned threads) const {
    if (!(f.spec() == grid_)) throw InvalidArgument("density grid does not match the operator grid");
    const std::size_t n = grid_.n_points;
    DensityGrid out(grid_);
    const std::vector<double>& in = f.values();

    auto rows = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const double* row = &m_[j * n];
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += row[i] * in[i];
            out[j] = s;
        }
    };
    if (threads <= 1) {
        rows(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (std::size_t begin = 0; begin < n; begin += chunk) pool.emplace_back(rows, begin, std::min(n, begin + chunk));
        for (auto& t : pool) t.join();
    }

    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(out[j]) || out[j] < 0.0)
            throw NumericalError("iteration produced invalid density " + fmt(out[j]) + " at node " + std::to_string(j) +
                                 " (x = " + fmt(grid_.node(j)) + ")");
    }
    Step step{std::move(out), 0.0};
    step.mass = step.density.normalize();
    return step;
}

DensityGrid iterate_once(const DensityGrid& f, const ModelParams& params, const FeeBand& band) {
    return TransitionOperator(f.spec(), params, band).apply(f).density;
}

StationaryResult solve_stationary(const ModelParams& params, const FeeBand& band, const SolveSettings& settings) {
    settings.validate();
    const GridSpec grid = auto_grid(params, band, settings);
    const TransitionOperator op(grid, params, band);

    StationaryResult result{initial_density(band, grid, settings.initial), {}};
    ConvergenceTrace& trace = result.trace;
    for (std::size_t k = 0; k < settings.max_iterations; ++k) {
        TransitionOperator::Step step = op.apply(result.density, settings.threads);
        const double dist = l1_distance(step.density, result.density);
        trace.l1_distances.push_back(dist);
        trace.truncation_loss.push_back(1.0 - step.mass);
        trace.final_normalization = step.mass;
        result.density = std::move(step.density);
        ++trace.iterations;
        if (dist < settings.l1_tolerance) {
            trace.converged = true;
            break;
        }
    }
    return result;
}

double l1_distance(const DensityGrid& f, const DensityGrid& g) {
    if (!f.same_grid(g)) throw InvalidArgument("l1_distance needs identical grids");
    std::vector<double> diff(f.n_points());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = std::abs(f[j] - g[j]);
    return DensityGrid(f.spec(), std::move(diff)).integral();
}

void write_density_csv(std::ostream& out, const DensityGrid& f) {
    out << "x,density\n";
    for (std::size_t j = 0; j < f.n_points(); ++j) out << fmt(f.node(j)) << ',' << fmt(f[j]) << '\n';
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
    out << "iteration,l1_distance,truncation_loss\n";
    for (std::size_t k = 0; k < trace.l1_distances.size(); ++k)
        out << (k + 1) << ',' << fmt(trace.l1_distances[k]) << ',' << fmt(trace.truncation_loss[k]) << '\n';
}

DensityGrid read_density_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("density CSV is empty");
    std::vector<double> xs;
    std::vector<double> vs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("density CSV line " + std::to_string(lineno) + " has no comma");
        xs.push_back(std::stod(line.substr(0, comma)));
        vs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 3) throw InvalidArgument("density CSV needs at least 3 rows");
    return DensityGrid(GridSpec{xs.front(), xs.back(), xs.size()}, std::move(vs));
}

}  // namespace arb
