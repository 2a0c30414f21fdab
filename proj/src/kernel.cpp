#include "arb/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "arb/quadrature.hpp"

namespace arb {

namespace {

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

// --- noise laws -------------------------------------------------------------

double GaussianNoise::log_pdf(double z) const { return -0.5 * z * z - kLogSqrt2Pi; }

StudentTNoise::StudentTNoise(double dof) : dof_(dof) {
    if (!(dof > 2.0)) throw InvalidArgument("student_t noise needs dof > 2, got " + describe(dof));
    scale_ = std::sqrt((dof - 2.0) / dof);
    log_norm_ = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                0.5 * std::log(dof * std::numbers::pi) - std::log(scale_);
}

double StudentTNoise::log_pdf(double z) const {
    const double t = z / scale_;
    return log_norm_ - 0.5 * (dof_ + 1.0) * std::log1p(t * t / dof_);
}

double StudentTNoise::sample(Philox& rng) const {
    std::gamma_distribution<double> chi2(0.5 * dof_, 2.0);
    const double n = rng.normal();
    return scale_ * n / std::sqrt(chi2(rng) / dof_);
}

double StudentTNoise::support_halfwidth() const { return 40.0; }

double LaplaceNoise::log_pdf(double z) const { return -std::numbers::sqrt2 * std::abs(z) - 0.5 * std::numbers::ln2; }

double LaplaceNoise::sample(Philox& rng) const {
    // Difference of two unit exponentials has variance 2.
    return (std::log(rng.uniform()) - std::log(rng.uniform())) / std::numbers::sqrt2;
}

std::shared_ptr<const NoiseLaw> gaussian_noise() {
    static const auto instance = std::make_shared<const GaussianNoise>();
    return instance;
}

// --- parameters --------------------------------------------------------------

void ModelParams::validate() const {
    if (!(sigma_step > 0.0) || !std::isfinite(sigma_step))
        throw InvalidArgument("sigma_step must be positive, got " + describe(sigma_step));
    if (!(jump_prob_q >= 0.0 && jump_prob_q < 1.0))
        throw InvalidArgument("jump_prob_q must lie in [0, 1), got " + describe(jump_prob_q));
    if (!(arrival_prob_p > 0.0 && arrival_prob_p <= 1.0))
        throw InvalidArgument("arrival_prob_p must lie in (0, 1], got " + describe(arrival_prob_p));
    if (!(jump_std > 0.0) || !std::isfinite(jump_std))
        throw InvalidArgument("jump_std must be positive, got " + describe(jump_std));
    if (!(step_seconds > 0.0))
        throw InvalidArgument("step_seconds must be positive, got " + describe(step_seconds));
    if (!std::isfinite(mu_step) || !std::isfinite(jump_mean))
        throw InvalidArgument("drift and jump mean must be finite");
}

ModelParams from_daily(const DailyParams& d, std::shared_ptr<const NoiseLaw> noise) {
    const double frac = d.step_seconds / kSecondsPerDay;
    const double root = std::sqrt(frac);
    ModelParams m;
    m.mu_step = d.mu_daily * frac;
    m.sigma_step = d.sigma_daily * root;
    m.jump_prob_q = d.q_step;
    m.jump_mean = d.jump_mean_daily * frac;
    // A zero jump std is only meaningful without jumps; keep the law proper.
    m.jump_std = d.jump_std_daily > 0.0 ? d.jump_std_daily * root : m.sigma_step;
    m.arrival_prob_p = d.p;
    m.step_seconds = d.step_seconds;
    m.noise = noise ? std::move(noise) : gaussian_noise();
    return m;
}

DailyParams to_daily(const ModelParams& m) {
    const double frac = m.step_seconds / kSecondsPerDay;
    const double root = std::sqrt(frac);
    DailyParams d;
    d.mu_daily = m.mu_step / frac;
    d.sigma_daily = m.sigma_step / root;
    d.q_step = m.jump_prob_q;
    d.jump_mean_daily = m.jump_mean / frac;
    d.jump_std_daily = m.jump_std / root;
    d.p = m.arrival_prob_p;
    d.step_seconds = m.step_seconds;
    return d;
}

FeeBand FeeBand::symmetric_bp(double gamma_bp, double gamma_cex_bp) {
    return FeeBand{gamma_bp * kBasisPoint, gamma_bp * kBasisPoint, gamma_cex_bp * kBasisPoint};
}

void FeeBand::validate() const {
    if (!(gamma_plus > 0.0) || !(gamma_minus > 0.0))
        throw InvalidArgument("fee band edges must be positive");
    if (!(gamma_cex >= 0.0)) throw InvalidArgument("gamma_cex must be non-negative");
}

// --- grids -------------------------------------------------------------------

void GridSpec::validate() const {
    if (n_points < 3 || n_points % 2 == 0)
        throw InvalidArgument("grid needs an odd number of points >= 3, got " + std::to_string(n_points));
    if (!(upper > lower)) throw InvalidArgument("grid upper bound must exceed lower bound");
}

DensityGrid::DensityGrid(GridSpec spec) : spec_(spec), values_(spec.n_points, 0.0) { spec_.validate(); }

DensityGrid::DensityGrid(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.n_points) throw InvalidArgument("density values do not match the grid size");
}

double DensityGrid::value_at(double x) const {
    if (!(x >= lower() && x <= upper())) return 0.0;
    const double pos = (x - lower()) / spacing();
    auto i = static_cast<std::size_t>(pos);
    if (i >= n_points() - 1) i = n_points() - 2;
    const double t = pos - static_cast<double>(i);
    return values_[i] * (1.0 - t) + values_[i + 1] * t;
}

double DensityGrid::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    s -= 0.5 * (values_.front() + values_.back());
    return s * spacing();
}

double DensityGrid::integral(double a, double b) const {
    a = std::max(a, lower());
    b = std::min(b, upper());
    if (!(b > a)) return 0.0;
    const double h = spacing();
    auto first = static_cast<std::size_t>(std::floor((a - lower()) / h));
    first = std::min(first, n_points() - 2);
    double total = 0.0;
    for (std::size_t i = first; i + 1 < n_points(); ++i) {
        const double lo = std::max(a, node(i));
        const double hi = std::min(b, node(i + 1));
        if (node(i) >= b) break;
        if (hi > lo) total += 0.5 * (hi - lo) * (value_at(lo) + value_at(hi));
    }
    return total;
}

double DensityGrid::normalize() {
    const double mass = integral();
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("cannot normalize a density with integral " + describe(mass));
    for (double& v : values_) v /= mass;
    return mass;
}

bool DensityGrid::same_grid(const DensityGrid& other) const { return spec_ == other.spec_; }

// --- densities ------------------------------------------------------------------

double clamp_to_band(double x, const FeeBand& band) {
    return std::clamp(x, band.lower_edge(), band.upper_edge());
}

double log_jump_convolution_numeric(double y, const ModelParams& params) {
    const NoiseLaw& noise = params.noise_law();
    const double mu = params.mu_step;
    const double sigma = params.sigma_step;
    const double jm = params.jump_mean;
    const double js = params.jump_std;

    // Integrate over the jump size w. The Gaussian jump law confines the
    // integrand to jm +- 12 js; the noise peak at w = y - mu adds resolution.
    const double lo = jm - 12.0 * js;
    const double hi = jm + 12.0 * js;
    constexpr int kPanels = 32;
    std::vector<double> cuts;
    cuts.reserve(2 * kPanels + 2);
    for (int k = 0; k <= kPanels; ++k) cuts.push_back(lo + (hi - lo) * k / kPanels);
    const double nh = noise.support_halfwidth() * sigma;
    const double nlo = std::max(lo, y - mu - nh);
    const double nhi = std::min(hi, y - mu + nh);
    if (nhi > nlo)
        for (int k = 0; k <= kPanels; ++k) cuts.push_back(nlo + (nhi - nlo) * k / kPanels);
    // Noise laws may have a kink at their centre; keep it on a panel edge.
    if (y - mu > lo && y - mu < hi) cuts.push_back(y - mu);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto log_integrand = [&](double w) {
        return log_normal_pdf(w, jm, js) + noise.log_pdf((y - mu - w) / sigma) - std::log(sigma);
    };

    static constexpr quad::Rule rule = quad::unit_rule();
    std::vector<double> logs;
    std::vector<double> weights;
    logs.reserve((cuts.size() - 1) * quad::kPoints);
    weights.reserve(logs.capacity());
    double peak = -INFINITY;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double width = cuts[c + 1] - cuts[c];
        for (std::size_t m = 0; m < quad::kPoints; ++m) {
            const double l = log_integrand(cuts[c] + width * rule.nodes[m]);
            logs.push_back(l);
            weights.push_back(width * rule.weights[m]);
            peak = std::max(peak, l);
        }
    }
    if (peak == -INFINITY) return -INFINITY;
    double sum = 0.0;
    for (std::size_t k = 0; k < logs.size(); ++k) sum += weights[k] * std::exp(logs[k] - peak);
    return peak + std::log(sum);
}

double log_increment_density(double y, const ModelParams& params) {
    const NoiseLaw& noise = params.noise_law();
    const double q = params.jump_prob_q;
    const double sigma = params.sigma_step;
    const double diffusive = noise.log_pdf((y - params.mu_step) / sigma) - std::log(sigma);
    if (q == 0.0) return diffusive;

    double jump;
    if (noise.is_gaussian()) {
        const double sd = std::hypot(sigma, params.jump_std);
        jump = log_normal_pdf(y, params.mu_step + params.jump_mean, sd);
    } else {
        jump = log_jump_convolution_numeric(y, params);
    }
    return log_add(std::log1p(-q) + diffusive, std::log(q) + jump);
}

double increment_density(double y, const ModelParams& params) {
    if (!(params.sigma_step > 0.0)) throw InvalidArgument("sigma_step must be positive");
    return std::exp(log_increment_density(y, params));
}

double transition_density(double x, double y, const ModelParams& params, const FeeBand& band) {
    const double clamped = clamp_to_band(x, band);
    if (clamped == x) return increment_density(y - x, params);
    const double p = params.arrival_prob_p;
    return (1.0 - p) * increment_density(y - x, params) + p * increment_density(y - clamped, params);
}

}  // namespace arb
