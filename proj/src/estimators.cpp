#include "arb/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace arb {

namespace {

constexpr double kEdgeSnap = 1e-9;

void require_symmetric(const FeeBand& band, const char* what) {
    band.validate();
    if (!band.is_symmetric()) throw InvalidArgument(std::string(what) + " requires a symmetric band (gamma_plus == gamma_minus)");
}

void require_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");
}

}  // namespace

std::pair<double, double> cfmm_constants(double theta) {
    require_theta(theta);
    return {std::pow(theta / (1.0 - theta), 1.0 - theta), std::pow((1.0 - theta) / theta, theta)};
}

void PoolSpec::validate() const {
    if (!(tvl > 0.0)) throw InvalidArgument("tvl must be positive");
    require_theta(theta);
    if (mid_price_w && liquidity_l) {
        const auto [c1, c2] = cfmm_constants(theta);
        const double implied = (c1 + c2) * *liquidity_l * std::pow(*mid_price_w, theta);
        if (std::abs(implied - tvl) > 1e-9 * tvl)
            throw InvalidArgument("tvl is inconsistent with liquidity_l and mid_price_w");
    }
}

double PoolSpec::scale() const {
    if (mid_price_w && liquidity_l) return *liquidity_l * std::pow(*mid_price_w, theta);
    const auto [c1, c2] = cfmm_constants(theta);
    return tvl / (c1 + c2);
}

double cpmm_profit_integrand(double t, double gamma) {
    // e^{+-gamma/2} (cosh(d/2) - 1) with d the distance past the edge.
    if (t > gamma) {
        const double s = std::sinh(0.25 * (t - gamma));
        return std::exp(0.5 * gamma) * 2.0 * s * s;
    }
    if (t < -gamma) {
        const double s = std::sinh(0.25 * (t + gamma));
        return std::exp(-0.5 * gamma) * 2.0 * s * s;
    }
    return 0.0;
}

double cpmm_volume_integrand(double t, double gamma) {
    if (t > gamma) return std::exp(0.5 * gamma) - std::exp(gamma - 0.5 * t);
    // Quote leg of the sell-side rebalance; written with the sign that makes
    // the traded amount positive.
    if (t < -gamma) return std::exp(-0.5 * t - gamma) - std::exp(-0.5 * gamma);
    return 0.0;
}

double cfmm_profit_integrand(double t, double gamma, double theta) {
    const auto [c1, c2] = cfmm_constants(theta);
    if (t > gamma) {
        const double d = t - gamma;
        return std::exp(gamma * (1.0 - theta)) * (c1 * std::expm1((1.0 - theta) * d) + c2 * std::expm1(-theta * d));
    }
    if (t < -gamma) {
        const double d = t + gamma;
        return std::exp(-gamma * (1.0 - theta)) * (c1 * std::expm1((1.0 - theta) * d) + c2 * std::expm1(-theta * d));
    }
    return 0.0;
}

double tail_integral(const DensityGrid& f, double edge, bool upper, const std::function<double(double)>& g) {
    const double h = f.spacing();
    if (!(edge > f.lower() && edge < f.upper())) throw InvalidArgument("band edge lies outside the density grid");
    const std::size_t n = f.n_points();
    const double pos = (edge - f.lower()) / h;
    auto near = static_cast<std::size_t>(std::llround(pos));
    const bool on_node = std::abs(pos - static_cast<double>(near)) < kEdgeSnap;

    double total = 0.0;
    if (upper) {
        std::size_t first;
        if (on_node) {
            first = near;
        } else {
            first = static_cast<std::size_t>(std::floor(pos)) + 1;
            total += 0.5 * (f.node(first) - edge) * (g(edge) * f.value_at(edge) + g(f.node(first)) * f[first]);
        }
        for (std::size_t j = first; j + 1 < n; ++j)
            total += 0.5 * h * (g(f.node(j)) * f[j] + g(f.node(j + 1)) * f[j + 1]);
    } else {
        std::size_t last;
        if (on_node) {
            last = near;
        } else {
            last = static_cast<std::size_t>(std::floor(pos));
            total += 0.5 * (edge - f.node(last)) * (g(edge) * f.value_at(edge) + g(f.node(last)) * f[last]);
        }
        for (std::size_t j = 0; j < last; ++j) total += 0.5 * h * (g(f.node(j)) * f[j] + g(f.node(j + 1)) * f[j + 1]);
    }
    return total;
}

double upper_tail_mass(const DensityGrid& f_star, const FeeBand& band) {
    return tail_integral(f_star, band.upper_edge(), true, [](double) { return 1.0; });
}

double lower_tail_mass(const DensityGrid& f_star, const FeeBand& band) {
    return tail_integral(f_star, band.lower_edge(), false, [](double) { return 1.0; });
}

double trade_region_mass(const DensityGrid& f_star, const FeeBand& band) {
    band.validate();
    return upper_tail_mass(f_star, band) + lower_tail_mass(f_star, band);
}

double expected_profit_cpmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool) {
    require_symmetric(band, "expected_profit_cpmm");
    pool.validate();
    const double gamma = band.upper_edge();
    const auto g = [gamma](double t) { return cpmm_profit_integrand(t, gamma); };
    const double tails = tail_integral(f_star, gamma, true, g) + tail_integral(f_star, -gamma, false, g);
    return pool.tvl * params.arrival_prob_p * tails;
}

double expected_volume_cpmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool) {
    require_symmetric(band, "expected_volume_cpmm");
    pool.validate();
    const double gamma = band.upper_edge();
    const auto g = [gamma](double t) { return cpmm_volume_integrand(t, gamma); };
    const double tails = tail_integral(f_star, gamma, true, g) + tail_integral(f_star, -gamma, false, g);
    return pool.tvl * params.arrival_prob_p * tails;
}

double arb_profit_ratio(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, double theta) {
    require_symmetric(band, "arb_profit_ratio");
    require_theta(theta);
    const double gamma = band.upper_edge();
    const auto g = [gamma, theta](double t) { return cfmm_profit_integrand(t, gamma, theta); };
    return params.arrival_prob_p * (tail_integral(f_star, gamma, true, g) + tail_integral(f_star, -gamma, false, g));
}

double expected_profit_cfmm(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool) {
    pool.validate();
    return pool.scale() * arb_profit_ratio(f_star, band, params, pool.theta);
}

TradeCounts expected_counts(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params) {
    const double scale = params.arrival_prob_p * params.steps_per_day();
    return {scale * upper_tail_mass(f_star, band), scale * lower_tail_mass(f_star, band)};
}

ArbReport make_report(const DensityGrid& f_star, const FeeBand& band, const ModelParams& params, const PoolSpec& pool) {
    if (pool.theta != 0.5) throw InvalidArgument("the volume closed form is only available for the CPMM (theta = 0.5)");
    ArbReport r;
    r.step_seconds = params.step_seconds;
    r.trade_probability = trade_region_mass(f_star, band);
    r.profit_per_step = expected_profit_cpmm(f_star, band, params, pool);
    r.volume_per_step = expected_volume_cpmm(f_star, band, params, pool);
    r.daily_profit = r.profit_per_step * params.steps_per_day();
    r.daily_volume = r.volume_per_step * params.steps_per_day();
    const TradeCounts counts = expected_counts(f_star, band, params);
    r.expected_count_up = counts.up_per_day;
    r.expected_count_down = counts.down_per_day;
    return r;
}

MixtureFit spread_mixture_fit(const std::vector<std::pair<double, DensityGrid>>& components, const DensityGrid& empirical) {
    const std::size_t g = components.size();
    if (g < 2) throw InvalidArgument("spread_mixture_fit needs at least two components");
    if (g > 16) throw InvalidArgument("spread_mixture_fit enumerates active sets and supports at most 16 components");
    const std::size_t n = empirical.n_points();
    for (const auto& [gamma, density] : components)
        if (!density.same_grid(empirical)) throw InvalidArgument("mixture component grid differs from the histogram grid");

    Eigen::MatrixXd basis(n, g);
    for (std::size_t k = 0; k < g; ++k)
        for (std::size_t j = 0; j < n; ++j) basis(j, k) = components[k].second[j];
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(empirical.values().data(), n);

    MixtureFit best;
    double best_sq = INFINITY;
    const double scale = target.squaredNorm() + basis.squaredNorm();
    for (std::uint32_t mask = 1; mask < (1u << g); ++mask) {
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < g; ++k)
            if (mask & (1u << k)) active.push_back(k);
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd sub(n, m);
        for (Eigen::Index c = 0; c < m; ++c) sub.col(c) = basis.col(static_cast<Eigen::Index>(active[c]));

        // KKT system of min ||sub w - target||^2 subject to sum(w) = 1.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        // The constraint row is scaled to the Gram diagonal so the pivot test
        // below is not fooled by the density magnitudes.
        kkt.topLeftCorner(m, m) = sub.transpose() * sub;
        const double c = std::max(kkt.topLeftCorner(m, m).diagonal().mean(), 1e-300);
        kkt.block(0, m, m, 1).setConstant(c);
        kkt.block(m, 0, 1, m).setConstant(c);
        Eigen::VectorXd rhs(m + 1);
        rhs.head(m) = sub.transpose() * target;
        rhs(m) = c;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(rhs);
        if ((sol.head(m).array() < -1e-12).any()) continue;

        std::vector<double> w(g, 0.0);
        for (Eigen::Index c = 0; c < m; ++c) w[active[c]] = std::max(0.0, sol(c));
        const double sq = (sub * sol.head(m) - target).squaredNorm();
        const double tie = 1e-10 * scale + 1e-300;
        if (sq < best_sq - tie) {
            best_sq = sq;
            best.weights = w;
            best.degenerate = false;
        } else if (std::abs(sq - best_sq) <= tie) {
            bool differs = false;
            for (std::size_t k = 0; k < g; ++k) differs = differs || std::abs(w[k] - best.weights[k]) > 1e-9;
            if (differs) {
                best.degenerate = true;
                if (std::lexicographical_compare(w.begin(), w.end(), best.weights.begin(), best.weights.end()))
                    best.weights = w;
            }
        }
    }
    if (best.weights.empty()) throw NumericalError("no feasible active set found in spread_mixture_fit");
    best.residual = std::sqrt(std::max(0.0, best_sq));
    return best;
}

void write_report_json(std::ostream& out, const ArbReport& r) {
    nlohmann::ordered_json j;
    j["trade_probability"] = r.trade_probability;
    j["profit_per_step"] = r.profit_per_step;
    j["volume_per_step"] = r.volume_per_step;
    j["daily_profit"] = r.daily_profit;
    j["daily_volume"] = r.daily_volume;
    j["expected_count_up"] = r.expected_count_up;
    j["expected_count_down"] = r.expected_count_down;
    j["step_seconds"] = r.step_seconds;
    out << j.dump(2) << '\n';
}

}  // namespace arb
