#include "arb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include "arb/estimators.hpp"
#include "json.hpp"

namespace arb {

namespace {

constexpr double kStateLimit = 1.0;

// Accumulators of one path; merged in path order.
struct PathStats {
    std::vector<std::uint64_t> counts;
    std::uint64_t steps = 0;
    std::uint64_t upper = 0;
    std::uint64_t lower = 0;
    double profit = 0.0;
    double volume = 0.0;
    // Means of complete batches of consecutive steps.
    std::vector<double> batch_profit;
    std::vector<double> batch_volume;
    std::vector<double> batch_tail;
};

double booked(double x, const FeeBand& band, bool profit) {
    if (x > band.upper_edge()) {
        const double g = band.upper_edge();
        return profit ? cpmm_profit_integrand(x, g) : cpmm_volume_integrand(x, g);
    }
    const double g = -band.lower_edge();
    return profit ? cpmm_profit_integrand(x, g) : cpmm_volume_integrand(x, g);
}

PathStats run_path(const ModelParams& params, const FeeBand& band, const SimSettings& s, const GridSpec& bins,
                   std::uint64_t stream, std::uint64_t n_steps) {
    Philox rng(s.seed, stream);
    PathStats st;
    st.counts.assign(bins.n_points, 0);
    const double h = bins.spacing();
    double x = 0.0;
    bool clamped = false;
    for (std::uint64_t k = 0; k < s.burn_in; ++k) x = chain_step(x, params, band, rng, clamped);

    const std::uint64_t per_batch = std::max<std::uint64_t>(1, n_steps / s.batches);
    double bp = 0.0;
    double bv = 0.0;
    double bt = 0.0;
    std::uint64_t in_batch = 0;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        // x is the pre-clamp state X~ observed at this step.
        if (x > band.upper_edge()) {
            ++st.upper;
            bt += 1.0;
        } else if (x < band.lower_edge()) {
            ++st.lower;
            bt += 1.0;
        }
        const double pos = (x - bins.lower) / h;
        if (pos >= 0.0 && pos <= static_cast<double>(bins.n_points - 1)) {
            ++st.counts[static_cast<std::size_t>(std::llround(pos))];
        }
        const double prev = x;
        x = chain_step(x, params, band, rng, clamped);
        if (clamped) {
            const double gain = s.tvl * booked(prev, band, true);
            const double traded = s.tvl * booked(prev, band, false);
            bp += gain;
            bv += traded;
            st.profit += gain;
            st.volume += traded;
        }
        if (!std::isfinite(x) || std::abs(x) > kStateLimit)
            throw NumericalError("simulated state left [-1, 1] at step " + std::to_string(k) + " of stream " +
                                 std::to_string(stream) + " (x = " + std::to_string(x) + ")");
        if (++in_batch == per_batch) {
            st.batch_profit.push_back(bp / static_cast<double>(per_batch));
            st.batch_volume.push_back(bv / static_cast<double>(per_batch));
            st.batch_tail.push_back(bt / static_cast<double>(per_batch));
            bp = bv = bt = 0.0;
            in_batch = 0;
        }
        ++st.steps;
    }
    return st;
}

double batch_stderr(const std::vector<double>& means) {
    const auto n = static_cast<double>(means.size());
    if (means.size() < 2) return 0.0;
    double m = 0.0;
    for (double v : means) m += v;
    m /= n;
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

void SimSettings::validate() const {
    if (n_steps < 1) throw InvalidArgument("n_steps must be >= 1");
    if (paths < 1) throw InvalidArgument("paths must be >= 1");
    if (n_steps < paths) throw InvalidArgument("n_steps must be at least the number of paths");
    if (batches < 2) throw InvalidArgument("batches must be >= 2");
    if (!(tvl > 0.0)) throw InvalidArgument("tvl must be positive");
}

double chain_step(double x, const ModelParams& params, const FeeBand& band, Philox& rng, bool& clamped) {
    clamped = false;
    if (!band.contains(x)) {
        const bool arrives = params.arrival_prob_p >= 1.0 || rng.bernoulli(params.arrival_prob_p);
        if (arrives) {
            x = clamp_to_band(x, band);
            clamped = true;
        }
    }
    double step = params.mu_step + params.sigma_step * params.noise_law().sample(rng);
    if (params.jump_prob_q > 0.0 && rng.bernoulli(params.jump_prob_q))
        step += params.jump_mean + params.jump_std * rng.normal();
    return x + step;
}

SimResult simulate_chain(const ModelParams& params, const FeeBand& band, const SimSettings& settings, const GridSpec& bins) {
    params.validate();
    band.validate();
    settings.validate();
    bins.validate();

    const unsigned paths = settings.paths;
    std::vector<PathStats> stats(paths);
    std::vector<std::uint64_t> lengths(paths, settings.n_steps / paths);
    for (std::uint64_t r = 0; r < settings.n_steps % paths; ++r) ++lengths[r];

    std::vector<std::exception_ptr> errors(paths);
    auto work = [&](unsigned first, unsigned stride) {
        for (unsigned i = first; i < paths; i += stride) {
            try {
                stats[i] = run_path(params, band, settings, bins, i, lengths[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min(settings.threads, paths));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    SimResult out;
    out.seed = settings.seed;
    std::vector<double> counts(bins.n_points, 0.0);
    std::uint64_t upper = 0;
    std::uint64_t lower = 0;
    double profit = 0.0;
    double volume = 0.0;
    std::vector<double> bprofit;
    std::vector<double> bvolume;
    std::vector<double> btail;
    for (const PathStats& st : stats) {
        for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += static_cast<double>(st.counts[j]);
        out.steps += st.steps;
        upper += st.upper;
        lower += st.lower;
        profit += st.profit;
        volume += st.volume;
        bprofit.insert(bprofit.end(), st.batch_profit.begin(), st.batch_profit.end());
        bvolume.insert(bvolume.end(), st.batch_volume.begin(), st.batch_volume.end());
        btail.insert(btail.end(), st.batch_tail.begin(), st.batch_tail.end());
    }
    const auto n = static_cast<double>(out.steps);
    out.realized_profit_per_step = profit / n;
    out.realized_volume_per_step = volume / n;
    out.upper_tail_frequency = static_cast<double>(upper) / n;
    out.lower_tail_frequency = static_cast<double>(lower) / n;
    out.profit_stderr = batch_stderr(bprofit);
    out.volume_stderr = batch_stderr(bvolume);
    out.tail_stderr = batch_stderr(btail);

    double inside = 0.0;
    for (double c : counts) inside += c;
    DensityGrid hist(bins);
    if (inside > 0.0) {
        const double h = bins.spacing();
        for (std::size_t j = 0; j < counts.size(); ++j) {
            const double width = (j == 0 || j + 1 == counts.size()) ? 0.5 * h : h;
            hist[j] = counts[j] / (inside * width);
        }
    }
    out.empirical_density = std::move(hist);
    return out;
}

std::vector<double> simulate_returns(const ModelParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    Philox rng(seed, 0);
    std::vector<double> r(n);
    const NoiseLaw& noise = params.noise_law();
    for (std::size_t i = 0; i < n; ++i) {
        double step = params.mu_step + params.sigma_step * noise.sample(rng);
        if (params.jump_prob_q > 0.0 && rng.bernoulli(params.jump_prob_q))
            step += params.jump_mean + params.jump_std * rng.normal();
        r[i] = step;
    }
    return r;
}

LlnEstimate lln_estimate(const SimResult& sim, const DensityGrid& f_star, const std::function<double(double)>& phi) {
    const DensityGrid& emp = sim.empirical_density;
    if (!emp.same_grid(f_star)) throw InvalidArgument("lln_estimate needs the simulation bins to match the density grid");
    const std::size_t n = emp.n_points();
    const double h = emp.spacing();
    LlnEstimate e;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = (j == 0 || j + 1 == n) ? 0.5 * h : h;
        const double v = phi(emp.node(j));
        e.sample_mean += w * v * emp[j];
        e.stationary_mean += w * v * f_star[j];
    }
    e.gap = std::abs(e.sample_mean - e.stationary_mean);
    return e;
}

double binned_l1(const DensityGrid& f_star, const DensityGrid& empirical, std::size_t coarse) {
    if (!f_star.same_grid(empirical)) throw InvalidArgument("binned_l1 needs identical grids");
    if (coarse < 1) throw InvalidArgument("binned_l1 needs at least one bin");
    std::vector<double> a(coarse, 0.0);
    std::vector<double> b(coarse, 0.0);
    const std::size_t n = f_star.n_points();
    const double h = f_star.spacing();
    const double width = (f_star.upper() - f_star.lower()) / static_cast<double>(coarse);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = (j == 0 || j + 1 == n) ? 0.5 * h : h;
        auto k = static_cast<std::size_t>((f_star.node(j) - f_star.lower()) / width);
        k = std::min(k, coarse - 1);
        a[k] += w * f_star[j];
        b[k] += w * empirical[j];
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < coarse; ++k) l1 += std::abs(a[k] - b[k]);
    return l1;
}

void write_sim_json(std::ostream& out, const SimResult& sim) {
    nlohmann::ordered_json j;
    j["seed"] = sim.seed;
    j["steps"] = sim.steps;
    j["trade_frequency"] = sim.trade_frequency();
    j["upper_tail_frequency"] = sim.upper_tail_frequency;
    j["lower_tail_frequency"] = sim.lower_tail_frequency;
    j["tail_stderr"] = sim.tail_stderr;
    j["realized_profit_per_step"] = sim.realized_profit_per_step;
    j["profit_stderr"] = sim.profit_stderr;
    j["realized_volume_per_step"] = sim.realized_volume_per_step;
    j["volume_stderr"] = sim.volume_stderr;
    out << j.dump(2) << '\n';
}

}  // namespace arb
