#include "arb/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <numbers>
#include <ostream>
#include <string>

namespace arb {

namespace {

constexpr double kMadToSigma = 1.482602218505602;  // 1 / Phi^{-1}(3/4)
constexpr std::size_t kMinObservations = 30;

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double norm_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (n % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;
};

// Sample mean and (n-1)-normalized standard deviation.
MeanStd mean_std(const std::vector<double>& v) {
    MeanStd r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std_dev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return r;
}

double log_normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

FitResult make_result(double tau, const ReturnSeries& s, const ModelParams& step, std::size_t n_jump) {
    const DailyParams d = to_daily(step);
    FitResult f;
    f.tau = tau;
    f.interval_seconds = s.interval_seconds;
    f.sigma_daily = d.sigma_daily;
    f.mu_daily = d.mu_daily;
    f.q_step = step.jump_prob_q;
    f.jump_mean_daily = step.jump_prob_q > 0.0 ? d.jump_mean_daily : 0.0;
    f.jump_std_daily = step.jump_prob_q > 0.0 ? d.jump_std_daily : 0.0;
    f.n_jump_obs = n_jump;
    f.n_diffusive_obs = s.size() - n_jump;
    f.log_likelihood = mixture_log_likelihood(s.returns, step);
    return f;
}

ModelParams step_params(const ReturnSeries& s, double mu, double sigma, double q, double jm, double js) {
    ModelParams m;
    m.mu_step = mu;
    m.sigma_step = sigma;
    m.jump_prob_q = q;
    m.jump_mean = jm;
    m.jump_std = q > 0.0 ? js : sigma;
    m.step_seconds = s.interval_seconds;
    return m;
}

// Variance of a standard normal truncated to (-k, k), relative to 1.
double truncated_variance_ratio(double k) {
    const double inside = 1.0 - 2.0 * norm_sf(k);
    return 1.0 - 2.0 * k * norm_pdf(k) / inside;
}

// Mass, first and second moments of N(m, s^2) outside [-k, k].
std::array<double, 3> outside_moments(double m, double s, double k) {
    const double a = (k - m) / s;
    const double b = (-k - m) / s;
    const double pa = norm_pdf(a);
    const double pb = norm_pdf(b);
    const double upper = norm_sf(a);
    const double lower = norm_cdf(b);
    const double mass = upper + lower;
    const double m1 = m * upper + s * pa + m * lower - s * pb;
    const double m2 = (m * m + s * s) * (upper + lower) + s * (m + k) * pa - s * (m - k) * pb;
    return {mass, m1, m2};
}

}  // namespace

void ReturnSeries::validate() const {
    if (returns.empty()) throw InvalidArgument("return series is empty");
    if (!(interval_seconds > 0.0)) throw InvalidArgument("sampling interval must be positive");
    if (!timestamps.empty() && timestamps.size() != returns.size())
        throw InvalidArgument("timestamps and returns differ in length");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (!(timestamps[i] > timestamps[i - 1])) throw InvalidArgument("timestamps must be strictly increasing");
    for (double r : returns)
        if (!std::isfinite(r)) throw InvalidArgument("return series contains a non-finite value");
}

ReturnSeries ReturnSeries::regular(std::vector<double> returns, double interval_seconds) {
    ReturnSeries s;
    s.interval_seconds = interval_seconds;
    s.timestamps.resize(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) s.timestamps[i] = interval_seconds * static_cast<double>(i + 1);
    s.returns = std::move(returns);
    return s;
}

ReturnSeries ReturnSeries::from_prices(const std::vector<double>& timestamps, const std::vector<double>& prices,
                                       double interval_seconds) {
    if (timestamps.size() != prices.size()) throw InvalidArgument("timestamps and prices differ in length");
    if (prices.size() < 2) throw InvalidArgument("need at least two prices");
    ReturnSeries s;
    s.interval_seconds = interval_seconds;
    for (std::size_t i = 1; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !(prices[i - 1] > 0.0)) throw InvalidArgument("prices must be positive");
        s.timestamps.push_back(timestamps[i]);
        s.returns.push_back(std::log(prices[i] / prices[i - 1]));
    }
    s.validate();
    return s;
}

ModelParams FitResult::to_params() const {
    DailyParams d;
    d.mu_daily = mu_daily;
    d.sigma_daily = sigma_daily;
    d.q_step = q_step;
    d.jump_mean_daily = jump_mean_daily;
    d.jump_std_daily = jump_std_daily;
    d.step_seconds = interval_seconds;
    return from_daily(d);
}

Partition classify_returns(const ReturnSeries& series, double tau) {
    series.validate();
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (series.size() < kMinObservations)
        throw InvalidArgument("classification needs at least " + std::to_string(kMinObservations) + " observations");

    Partition p;
    p.center = median(series.returns);
    std::vector<double> dev(series.size());
    for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(series.returns[i] - p.center);
    p.scale = kMadToSigma * median(dev);
    p.threshold = tau * p.scale;
    p.is_jump.resize(series.size());
    for (std::size_t i = 0; i < dev.size(); ++i) {
        // With zero dispersion only observations off the median are jumps.
        const bool jump = p.scale > 0.0 ? dev[i] >= p.threshold : dev[i] > 0.0;
        p.is_jump[i] = jump;
        (jump ? p.jumps : p.diffusive).push_back(series.returns[i]);
    }
    return p;
}

double mixture_log_likelihood(const std::vector<double>& returns, const ModelParams& m) {
    if (returns.empty()) throw InvalidArgument("log-likelihood of an empty series");
    const double q = m.jump_prob_q;
    const double jump_sd = std::sqrt(m.sigma_step * m.sigma_step + m.jump_std * m.jump_std);
    double total = 0.0;
    for (double r : returns) {
        const double a = std::log1p(-q) + log_normal_pdf(r, m.mu_step, m.sigma_step);
        if (q <= 0.0) {
            total += a;
            continue;
        }
        const double b = std::log(q) + log_normal_pdf(r, m.mu_step + m.jump_mean, jump_sd);
        const double hi = std::max(a, b);
        total += hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
    return total / static_cast<double>(returns.size());
}

FitResult fit_pure_diffusion(const ReturnSeries& series) {
    series.validate();
    if (series.size() < 2) throw InvalidArgument("pure-diffusion fit needs at least two observations");
    const MeanStd all = mean_std(series.returns);
    if (!(all.std_dev > 0.0)) throw InvalidArgument("returns have zero variance");
    return make_result(0.0, series, step_params(series, all.mean, all.std_dev, 0.0, 0.0, 0.0), 0);
}

FitResult fit_params(const ReturnSeries& series, double tau) {
    const Partition part = classify_returns(series, tau);
    if (part.diffusive.size() < 2) throw InvalidArgument("degenerate partition: fewer than two diffusive returns");
    const MeanStd diff = mean_std(part.diffusive);
    if (!(diff.std_dev > 0.0)) throw InvalidArgument("degenerate partition: diffusive returns have zero variance");
    if (part.jumps.size() < 2) {
        FitResult f = fit_pure_diffusion(series);
        f.tau = tau;
        f.n_jump_obs = part.jumps.size();
        f.n_diffusive_obs = part.diffusive.size();
        return f;
    }
    const MeanStd jump = mean_std(part.jumps);
    const double q = static_cast<double>(part.jumps.size()) / static_cast<double>(series.size());
    const double js = jump.std_dev > 0.0 ? jump.std_dev : diff.std_dev;
    return make_result(tau, series, step_params(series, diff.mean, diff.std_dev, q, jump.mean - diff.mean, js),
                       part.jumps.size());
}

FitResult fit_params_corrected(const ReturnSeries& series, double tau) {
    const Partition part = classify_returns(series, tau);
    const FitResult pure = fit_pure_diffusion(series);
    const auto n = static_cast<double>(series.size());

    // Location and scale of the diffusive part from the inliers, undoing the
    // variance lost to the truncation at +-tau*sigma.
    double mu = part.center;
    double sigma = part.scale > 0.0 ? part.scale : mean_std(series.returns).std_dev;
    if (!(sigma > 0.0)) throw InvalidArgument("returns have zero variance");
    const double ratio = truncated_variance_ratio(tau);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> inside;
        for (double r : series.returns)
            if (std::abs(r - mu) < tau * sigma) inside.push_back(r);
        if (inside.size() < 2) throw InvalidArgument("degenerate partition: fewer than two diffusive returns");
        const MeanStd ms = mean_std(inside);
        const double next = ms.std_dev / std::sqrt(ratio);
        const bool done = std::abs(next - sigma) <= 1e-12 * sigma && std::abs(ms.mean - mu) <= 1e-12 * sigma;
        mu = ms.mean;
        sigma = next;
        if (done) break;
    }

    // Outlier count and moments in units of sigma around mu.
    double count = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (double r : series.returns) {
        const double z = (r - mu) / sigma;
        if (std::abs(z) >= tau) {
            count += 1.0;
            s1 += z;
            s2 += z * z;
        }
    }
    const double k = tau;
    const double pd = 2.0 * norm_sf(k);
    const double e2d = 2.0 * (k * norm_pdf(k) + norm_sf(k));
    const double c = count / n;
    if (!(c > pd) || count < 2.0) return pure;
    s1 /= n;
    s2 /= n;

    // Solve for the jump-branch law N(m, s^2) (in sigma units, s > 1) with
    // s = sqrt(1 + e^u); q follows from the outlier count.
    auto residual = [&](double m, double u, double& q) {
        const double s = std::sqrt(1.0 + std::exp(u));
        const auto [mass, m1, m2] = outside_moments(m, s, k);
        q = (c - pd) / (mass - pd);
        return std::array<double, 2>{q * m1 - s1, (1.0 - q) * e2d + q * m2 - s2};
    };
    double m = s1 / c;
    const double var0 = std::max(s2 / c - m * m, 1.5);
    double u = std::log(var0 - 1.0);
    double q = 0.0;
    auto f = residual(m, u, q);
    auto norm = [](const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); };
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        if (norm(f) < 1e-13 * std::max(1.0, s2)) {
            converged = true;
            break;
        }
        const double hm = 1e-7 * std::max(1.0, std::abs(m));
        const double hu = 1e-7 * std::max(1.0, std::abs(u));
        double qq = 0.0;
        const auto fm = residual(m + hm, u, qq);
        const auto fu = residual(m, u + hu, qq);
        const double j00 = (fm[0] - f[0]) / hm, j10 = (fm[1] - f[1]) / hm;
        const double j01 = (fu[0] - f[0]) / hu, j11 = (fu[1] - f[1]) / hu;
        const double det = j00 * j11 - j01 * j10;
        if (!std::isfinite(det) || det == 0.0) break;
        const double dm = -(j11 * f[0] - j01 * f[1]) / det;
        const double du = -(-j10 * f[0] + j00 * f[1]) / det;
        double step = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h, step *= 0.5) {
            double qt = 0.0;
            const auto ft = residual(m + step * dm, u + step * du, qt);
            if (std::isfinite(ft[0]) && std::isfinite(ft[1]) && norm(ft) < norm(f)) {
                m += step * dm;
                u += step * du;
                f = ft;
                q = qt;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (!converged || !(q > 0.0 && q < 1.0)) return pure;

    const double jump_sd = std::sqrt(std::exp(u)) * sigma;
    FitResult fit = make_result(tau, series, step_params(series, mu, sigma, q, m * sigma, jump_sd),
                                static_cast<std::size_t>(count));
    if (fit.log_likelihood < pure.log_likelihood) {
        FitResult fallback = pure;
        fallback.tau = tau;
        return fallback;
    }
    return fit;
}

TauSweep tau_sweep(const ReturnSeries& series, const std::vector<double>& taus, FitMethod method) {
    if (taus.empty()) throw InvalidArgument("tau list is empty");
    TauSweep sweep;
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    for (double tau : sorted)
        sweep.fits.push_back(method == FitMethod::Raw ? fit_params(series, tau) : fit_params_corrected(series, tau));
    for (std::size_t i = 1; i < sweep.fits.size(); ++i)
        if (sweep.fits[i].log_likelihood > sweep.fits[sweep.best].log_likelihood) sweep.best = i;
    return sweep;
}

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Small-lambda form: 1 - sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2)).
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const double t = (2.0 * j - 1.0);
            sum += std::exp(-t * t * c);
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

MomentStats moments_and_ks(const std::vector<double>& x) {
    if (x.size() < kMinObservations)
        throw InvalidArgument("moments_and_ks needs at least " + std::to_string(kMinObservations) + " observations");
    MomentStats st;
    st.n = x.size();
    const auto n = static_cast<double>(x.size());
    for (double v : x) st.mean += v;
    st.mean /= n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - st.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw InvalidArgument("zero variance");
    st.skewness = m3 / std::pow(m2, 1.5);
    st.kurtosis = m4 / (m2 * m2);
    st.std_dev = std::sqrt(m2 * n / (n - 1.0));

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = norm_cdf((sorted[i] - st.mean) / st.std_dev);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    st.ks_statistic = d;
    st.ks_p_value = kolmogorov_survival(std::sqrt(n) * d);
    return st;
}

ReturnSeries read_price_csv(std::istream& in, double interval_seconds) {
    std::vector<double> ts;
    std::vector<double> px;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (lineno == 1 && line == "timestamp,price")) continue;
        std::istringstream row(line);
        double t = 0.0;
        double p = 0.0;
        char comma = 0;
        if (!(row >> t >> comma >> p) || comma != ',' || !(row >> std::ws).eof())
            throw InvalidArgument("price file line " + std::to_string(lineno) + ": expected 'timestamp,price'");
        ts.push_back(t);
        px.push_back(p);
    }
    return ReturnSeries::from_prices(ts, px, interval_seconds);
}

void write_price_csv(std::ostream& out, const std::vector<double>& timestamps, const std::vector<double>& prices) {
    if (timestamps.size() != prices.size()) throw InvalidArgument("timestamps and prices differ in length");
    out << "timestamp,price\n";
    char buf[64];
    for (std::size_t i = 0; i < prices.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", timestamps[i], prices[i]);
        out << buf;
    }
}

void write_fit_csv(std::ostream& out, const std::vector<FitResult>& fits) {
    out << "tau,LL,sigma,mu,mu_J,sigma_J,q\n";
    char buf[256];
    for (const FitResult& f : fits) {
        if (f.tau > 0.0)
            std::snprintf(buf, sizeof buf, "%.4g,", f.tau);
        else
            std::snprintf(buf, sizeof buf, ",");
        out << buf;
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", f.log_likelihood, f.sigma_daily, f.mu_daily,
                      f.jump_mean_daily, f.jump_std_daily, f.q_step);
        out << buf;
    }
}

}  // namespace arb
