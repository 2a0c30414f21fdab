#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "arb/rng.hpp"

namespace arb {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kBasisPoint = 1e-4;

// Raised for inputs that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when an iteration produces non-finite values or the state escapes.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Noise laws. A law describes the standardized diffusive noise (zero mean,
// unit variance); the chain scales it by sigma_step and shifts it by mu_step.
// ---------------------------------------------------------------------------
class NoiseLaw {
public:
    virtual ~NoiseLaw() = default;
    virtual double log_pdf(double z) const = 0;
    virtual double sample(Philox& rng) const = 0;
    virtual bool is_gaussian() const { return false; }
    // Half-width (in standard units) outside of which the mass is negligible
    // for quadrature purposes.
    virtual double support_halfwidth() const = 0;
    virtual std::string name() const = 0;
};

class GaussianNoise final : public NoiseLaw {
public:
    double log_pdf(double z) const override;
    double sample(Philox& rng) const override { return rng.normal(); }
    bool is_gaussian() const override { return true; }
    double support_halfwidth() const override { return 12.0; }
    std::string name() const override { return "gaussian"; }
};

// Student-t with `dof` > 2 degrees of freedom, rescaled to unit variance.
class StudentTNoise final : public NoiseLaw {
public:
    explicit StudentTNoise(double dof);
    double log_pdf(double z) const override;
    double sample(Philox& rng) const override;
    double support_halfwidth() const override;
    std::string name() const override { return "student_t"; }
    double dof() const { return dof_; }

private:
    double dof_;
    double scale_;     // sqrt((dof-2)/dof): standard t -> unit variance
    double log_norm_;  // log of the unit-variance density at 0
};

// Laplace noise with unit variance: a Gaussian diffusion observed after an
// exponentially distributed holding time (Poisson block arrivals with the
// step length as mean interval).
class LaplaceNoise final : public NoiseLaw {
public:
    double log_pdf(double z) const override;
    double sample(Philox& rng) const override;
    double support_halfwidth() const override { return 40.0; }
    std::string name() const override { return "laplace"; }
};

std::shared_ptr<const NoiseLaw> gaussian_noise();

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Per-step parameters of the free chain X_{n+1} - X_n = mu + sigma*eps + Z*U,
// with Z ~ Bernoulli(q), U ~ N(jump_mean, jump_std^2), and the arbitrageur
// arriving with probability p each step.
struct ModelParams {
    double mu_step = 0.0;
    double sigma_step = 1e-3;
    double jump_prob_q = 0.0;
    double jump_mean = 0.0;
    double jump_std = 1e-3;
    double arrival_prob_p = 1.0;
    double step_seconds = 12.0;
    std::shared_ptr<const NoiseLaw> noise = gaussian_noise();

    void validate() const;
    double steps_per_day() const { return kSecondsPerDay / step_seconds; }
    const NoiseLaw& noise_law() const { return noise ? *noise : *gaussian_noise(); }
};

// The same parameters in daily units (drift and jump mean scale linearly in
// time, volatility and jump std with its square root).
struct DailyParams {
    double mu_daily = 0.0;
    double sigma_daily = 0.05;
    double q_step = 0.0;
    double jump_mean_daily = 0.0;
    double jump_std_daily = 0.0;
    double p = 1.0;
    double step_seconds = 12.0;
};

ModelParams from_daily(const DailyParams& d, std::shared_ptr<const NoiseLaw> noise = gaussian_noise());
DailyParams to_daily(const ModelParams& m);

// AMM fee (log units) on each side plus the CEX spread add-on.
struct FeeBand {
    double gamma_plus = 0.003;
    double gamma_minus = 0.003;
    double gamma_cex = 0.0;

    static FeeBand symmetric_bp(double gamma_bp, double gamma_cex_bp = 0.0);

    void validate() const;
    double upper_edge() const { return gamma_plus + gamma_cex; }
    double lower_edge() const { return -(gamma_minus + gamma_cex); }
    double width() const { return upper_edge() - lower_edge(); }
    bool contains(double x) const { return x >= lower_edge() && x <= upper_edge(); }
    bool is_symmetric() const { return gamma_plus == gamma_minus; }
};

struct GridSpec {
    double lower = -1.0;
    double upper = 1.0;
    std::size_t n_points = 201;

    void validate() const;
    double spacing() const { return (upper - lower) / static_cast<double>(n_points - 1); }
    double node(std::size_t j) const { return lower + spacing() * static_cast<double>(j); }
    bool operator==(const GridSpec&) const = default;
};

// Density values on a uniform grid; linear between nodes, zero outside.
class DensityGrid {
public:
    DensityGrid() = default;
    explicit DensityGrid(GridSpec spec);
    DensityGrid(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    double lower() const { return spec_.lower; }
    double upper() const { return spec_.upper; }
    std::size_t n_points() const { return values_.size(); }
    double spacing() const { return spec_.spacing(); }
    double node(std::size_t j) const { return spec_.node(j); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }
    double& operator[](std::size_t j) { return values_[j]; }

    // Linear interpolation; zero outside [lower, upper].
    double value_at(double x) const;
    // Trapezoid integral over the whole grid.
    double integral() const;
    // Exact integral of the piecewise-linear interpolant over [a, b].
    double integral(double a, double b) const;
    // Scales to unit integral and returns the integral before scaling.
    double normalize();
    bool same_grid(const DensityGrid& other) const;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Pointwise densities
// ---------------------------------------------------------------------------

// Projects x onto the effective band; the band is a closed interval.
double clamp_to_band(double x, const FeeBand& band);

// Density h(y) of one free-chain increment.
double increment_density(double y, const ModelParams& params);

// log h(y), evaluated without forming (1/sigma)*f(.) directly.
double log_increment_density(double y, const ModelParams& params);

// Density of mu + sigma*eps + U at y (the jump branch), always computed by
// quadrature. Exposed so the closed Gaussian form can be checked against it.
double log_jump_convolution_numeric(double y, const ModelParams& params);

// Transition density q(x, y) of the clamped chain.
double transition_density(double x, double y, const ModelParams& params, const FeeBand& band);

}  // namespace arb
