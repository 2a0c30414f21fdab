// Command-line front end: solve, fit, estimate, simulate, reproduce, histogram.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arb/calibrate.hpp"
#include "arb/config.hpp"
#include "arb/estimators.hpp"
#include "arb/marketdata.hpp"
#include "arb/reference_tables.hpp"
#include "arb/reproduce.hpp"
#include "arb/simulator.hpp"
#include "arb/stationary.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace arb {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr const char* kVersion = "1.0.0";
constexpr const char* kDefaultTaus = "1.5,1.6,1.7,1.8,1.9,2.0,2.1,2.2,2.3,2.4,2.5,3.0,3.5,4.0";

struct Globals {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::vector<std::string> sets;
    std::optional<double> q, gamma, gamma_cex, dt, sigma, mu, p;
    std::optional<std::size_t> n_points, iterations;
};

// Effective inputs of one command and the files it wrote.
struct Run {
    std::string command;
    KeyValueConfig cfg;
    fs::path out;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<std::string> outputs;
    ordered_json extra = ordered_json::object();

    std::ofstream open(const std::string& name) {
        std::ofstream f(out / name);
        if (!f) throw ConfigError("cannot write " + (out / name).string());
        outputs.push_back(name);
        return f;
    }
};

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        KeyValueConfig tmp;
        tmp.set(key, item);
        v.push_back(tmp.get_double(key));
    }
    if (v.empty()) throw ConfigError("config key '" + key + "' is an empty list");
    return v;
}

std::size_t get_count(const KeyValueConfig& cfg, const std::string& key, std::size_t fallback) {
    const double v = cfg.get_double_or(key, static_cast<double>(fallback));
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("config key '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

SolveSettings solve_settings(const Run& run) {
    SolveSettings s;
    s.n_points = get_count(run.cfg, "n_points", 801);
    s.max_iterations = get_count(run.cfg, "max_iterations", 1000);
    s.l1_tolerance = run.cfg.get_double_or("l1_tolerance", 1e-10);
    s.grid_halfwidth = run.cfg.find_double("grid_halfwidth");
    const std::string init = run.cfg.find("initial").value_or("window");
    if (init == "dirac")
        s.initial = InitialGuess::Dirac;
    else if (init != "window")
        throw ConfigError("config key 'initial' must be window or dirac");
    s.threads = run.threads;
    s.validate();
    return s;
}

PoolSpec pool_spec(const KeyValueConfig& cfg, const FeeBand& band) {
    PoolSpec pool;
    pool.tvl = cfg.get_double_or("tvl", 1.0);
    pool.theta = cfg.get_double_or("theta", 0.5);
    pool.gamma_bp = band.gamma_plus / kBasisPoint;
    pool.mid_price_w = cfg.find_double("mid_price_w");
    pool.liquidity_l = cfg.find_double("liquidity_l");
    pool.validate();
    return pool;
}

void print_kv(const char* key, double v) { std::printf("%-24s %.10g\n", key, v); }

// ---------------------------------------------------------------------------

void cmd_solve(Run& run) {
    const ModelParams m = model_params_from_config(run.cfg);
    const FeeBand band = fee_band_from_config(run.cfg);
    const StationaryResult r = solve_stationary(m, band, solve_settings(run));
    {
        auto f = run.open("density.csv");
        write_density_csv(f, r.density);
    }
    {
        auto f = run.open("trace.csv");
        write_trace_csv(f, r.trace);
    }
    run.extra["iterations"] = r.trace.iterations;
    run.extra["converged"] = r.trace.converged;
    if (!r.trace.converged) std::cerr << "warning: no convergence within max_iterations\n";
    print_kv("iterations", static_cast<double>(r.trace.iterations));
    print_kv("converged", r.trace.converged ? 1.0 : 0.0);
    print_kv("trade_region_mass", trade_region_mass(r.density, band));
    print_kv("density_at_zero", r.density.value_at(0.0));
}

void cmd_estimate(Run& run) {
    const ModelParams m = model_params_from_config(run.cfg);
    const FeeBand base = fee_band_from_config(run.cfg);
    std::vector<double> sweep;
    if (const auto s = run.cfg.find("gamma_cex_sweep_bp")) sweep = parse_list("gamma_cex_sweep_bp", *s);
    const auto density_path = run.cfg.find("density");
    if (density_path && !sweep.empty())
        throw ConfigError("gamma_cex_sweep_bp needs the density solved inline; drop the density key");

    auto estimate = [&](const FeeBand& band, const std::string& name) {
        DensityGrid f;
        if (density_path) {
            std::ifstream in(*density_path);
            if (!in) throw ConfigError("cannot open density file " + *density_path);
            f = read_density_csv(in);
            if (!(f.lower() < band.lower_edge() && f.upper() > band.upper_edge()))
                throw InvalidArgument("density grid [" + std::to_string(f.lower()) + ", " + std::to_string(f.upper()) +
                                      "] does not cover the fee band");
        } else {
            f = solve_stationary(m, band, solve_settings(run)).density;
        }
        const ArbReport rep = make_report(f, band, m, pool_spec(run.cfg, band));
        auto out = run.open(name);
        write_report_json(out, rep);
        std::printf("%s: P=%.6f daily_volume=%.6g daily_profit=%.6g\n", name.c_str(), rep.trade_probability,
                    rep.daily_volume, rep.daily_profit);
    };
    if (sweep.empty()) {
        estimate(base, "report.json");
        return;
    }
    for (double g : sweep) {
        FeeBand band = base;
        band.gamma_cex = g * kBasisPoint;
        band.validate();
        char name[64];
        std::snprintf(name, sizeof name, "report_gcex_%gbp.json", g);
        estimate(band, name);
    }
}

void cmd_simulate(Run& run, bool compare) {
    const ModelParams m = model_params_from_config(run.cfg);
    const FeeBand band = fee_band_from_config(run.cfg);
    const SolveSettings ss = solve_settings(run);
    SimSettings s;
    s.n_steps = get_count(run.cfg, "n_steps", 1'000'000);
    s.burn_in = get_count(run.cfg, "burn_in", 10'000);
    s.paths = static_cast<unsigned>(get_count(run.cfg, "paths", 1));
    s.batches = get_count(run.cfg, "batches", 50);
    s.tvl = run.cfg.get_double_or("tvl", 1.0);
    s.seed = run.seed;
    s.threads = run.threads;
    const GridSpec bins = auto_grid(m, band, ss);
    const SimResult sim = simulate_chain(m, band, s, bins);
    {
        auto f = run.open("sim.json");
        write_sim_json(f, sim);
    }
    {
        auto f = run.open("empirical_density.csv");
        write_density_csv(f, sim.empirical_density);
    }
    print_kv("trade_frequency", sim.trade_frequency());
    print_kv("profit_per_step", sim.realized_profit_per_step);
    print_kv("volume_per_step", sim.realized_volume_per_step);
    if (!compare) return;

    const StationaryResult r = solve_stationary(m, band, ss);
    const double coarse = run.cfg.get_double_or("compare_bins", 81);
    PoolSpec pool;
    pool.tvl = s.tvl;
    pool.gamma_bp = band.gamma_plus / kBasisPoint;
    ordered_json j;
    j["solver_trade_region"] = trade_region_mass(r.density, band);
    j["sim_trade_frequency"] = sim.trade_frequency();
    j["binned_l1"] = binned_l1(r.density, sim.empirical_density, static_cast<std::size_t>(coarse));
    j["solver_profit_per_step"] = expected_profit_cpmm(r.density, band, m, pool);
    j["sim_profit_per_step"] = sim.realized_profit_per_step;
    j["profit_stderr"] = sim.profit_stderr;
    j["solver_volume_per_step"] = expected_volume_cpmm(r.density, band, m, pool);
    j["sim_volume_per_step"] = sim.realized_volume_per_step;
    j["volume_stderr"] = sim.volume_stderr;
    auto f = run.open("compare.json");
    f << j.dump(2) << '\n';
    print_kv("binned_l1", j["binned_l1"].get<double>());
}

void cmd_fit(Run& run, const std::string& input) {
    ReturnSeries series;
    if (!input.empty()) {
        std::ifstream in(input);
        if (!in) throw ConfigError("cannot open price file " + input);
        series = read_price_csv(in, run.cfg.get_double_or("interval_seconds", 12.0));
    } else if (run.cfg.has("synthetic_steps")) {
        const ModelParams m = model_params_from_config(run.cfg);
        series = ReturnSeries::regular(simulate_returns(m, get_count(run.cfg, "synthetic_steps", 0), run.seed),
                                       m.step_seconds);
    } else {
        throw ConfigError("fit needs --input <prices.csv> or the synthetic_steps key");
    }
    std::vector<double> taus;
    if (const auto t = run.cfg.find("tau"))
        taus = parse_list("tau", *t);
    else
        taus = parse_list("taus", run.cfg.find("taus").value_or(kDefaultTaus));
    const std::string method = run.cfg.find("fit_method").value_or("raw");
    if (method != "raw" && method != "corrected") throw ConfigError("fit_method must be raw or corrected");
    const TauSweep sweep = tau_sweep(series, taus, method == "raw" ? FitMethod::Raw : FitMethod::Corrected);
    {
        auto f = run.open("fit.csv");
        write_fit_csv(f, sweep.fits);
    }
    const FitResult pure = fit_pure_diffusion(series);
    const MomentStats st = moments_and_ks(series.returns);
    ordered_json j;
    j["observations"] = series.size();
    j["interval_seconds"] = series.interval_seconds;
    j["method"] = method;
    j["best_tau"] = sweep.fits[sweep.best].tau;
    j["best_log_likelihood"] = sweep.fits[sweep.best].log_likelihood;
    j["pure_diffusion"] = {{"LL", pure.log_likelihood}, {"sigma", pure.sigma_daily}, {"mu", pure.mu_daily}};
    j["moments"] = {{"mean", st.mean},         {"std", st.std_dev},
                    {"skewness", st.skewness}, {"kurtosis", st.kurtosis},
                    {"ks_statistic", st.ks_statistic}, {"ks_p_value", st.ks_p_value}};
    auto f = run.open("fit_summary.json");
    f << j.dump(2) << '\n';
    std::printf("best tau %.4g (LL %.6f), pure LL %.6f\n", sweep.fits[sweep.best].tau,
                sweep.fits[sweep.best].log_likelihood, pure.log_likelihood);
}

void cmd_reproduce(Run& run, const std::string& cells, std::optional<std::size_t> budget, const std::string& table) {
    if (table != "both" && table != "trade" && table != "profit") throw ConfigError("--table must be trade, profit or both");
    ReproduceSettings s;
    s.n_points = get_count(run.cfg, "n_points", 801);
    s.trade_iterations = get_count(run.cfg, "trade_iterations", 8000);
    s.profit_iterations = get_count(run.cfg, "profit_iterations", 1000);
    if (budget) {
        s.trade_iterations = std::min(s.trade_iterations, *budget);
        s.profit_iterations = std::min(s.profit_iterations, *budget);
    }
    s.l1_tolerance = run.cfg.get_double_or("l1_tolerance", 1e-13);
    if (run.cfg.has("noise")) s.noise = noise_from_config(run.cfg);
    s.jump_mean_daily = run.cfg.get_double_or("jump_mean_daily", reference::kProfitJumpMeanDaily);
    s.jump_std_daily = run.cfg.get_double_or("jump_std_daily", reference::kProfitJumpStdDaily);
    s.theta = run.cfg.get_double_or("theta", 0.5);
    s.threads = run.threads;
    s.validate();
    const CellFilter filter = CellFilter::parse(cells);

    if (table != "profit") {
        std::vector<TradeRegionCell> out;
        for (std::size_t i = 0; i < reference::kStepSeconds.size(); ++i)
            for (std::size_t g = 0; g < reference::kGammaBp.size(); ++g)
                if (filter.keeps(reference::kStepSeconds[i], reference::kGammaBp[g]))
                    out.push_back(compute_trade_region_cell(i, g, s));
        auto f = run.open("trade_region.csv");
        write_trade_region_csv(f, out);
        std::size_t ok = 0;
        for (const auto& c : out) ok += c.pass();
        std::printf("trade region: %zu/%zu cells within tolerance\n", ok, out.size());
    }
    if (table != "trade") {
        std::vector<ProfitCell> out;
        for (std::size_t i = 0; i < reference::kStepSeconds.size(); ++i)
            for (std::size_t q = 0; q < reference::kJumpProbs.size(); ++q)
                for (std::size_t g = 0; g < reference::kGammaBp.size(); ++g)
                    if (filter.keeps(reference::kStepSeconds[i], reference::kGammaBp[g]))
                        out.push_back(compute_profit_cell(i, q, g, s));
        auto f = run.open("profit.csv");
        write_profit_csv(f, out);
        std::size_t ok = 0;
        for (const auto& c : out) ok += c.pass();
        std::printf("profit: %zu/%zu cells within tolerance\n", ok, out.size());
    }
}

void cmd_histogram(Run& run, std::string ticks_path, std::string swaps_path) {
    if (ticks_path.empty()) ticks_path = run.cfg.find("ticks").value_or("");
    if (swaps_path.empty()) swaps_path = run.cfg.find("swaps").value_or("");
    if (ticks_path.empty() || swaps_path.empty()) throw ConfigError("histogram needs --ticks and --swaps (or the ticks/swaps keys)");
    LoadReport tick_report;
    LoadReport swap_report;
    const auto ticks = load_ticks(ticks_path, &tick_report);
    const auto swaps = load_swaps(swaps_path, &swap_report);
    for (const auto* rep : {&tick_report, &swap_report}) {
        for (const auto& w : rep->warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& e : rep->errors) std::cerr << "rejected: " << e << '\n';
    }
    MispriceSettings ms;
    ms.window = run.cfg.get_double_or("window", 12.0);
    ms.delay = run.cfg.get_double_or("delay", 8.0);
    ms.pool_fee = run.cfg.get_double_or("pool_fee", 0.003);
    ms.liquidity = run.cfg.find_double("liquidity_l");
    const MispriceSeries series = mispricing_series(swaps, ticks, ms);
    if (series.samples.empty()) throw InvalidArgument("no swap has CEX quotes in its window");

    HistogramSpec hs;
    hs.lower = run.cfg.get_double_or("hist_lower", -0.01);
    hs.upper = run.cfg.get_double_or("hist_upper", 0.01);
    hs.bins = get_count(run.cfg, "hist_bins", 40);
    {
        auto f = run.open("misprice_histogram.csv");
        write_histogram_csv(f, misprice_histograms(series.samples, hs));
    }
    {
        auto f = run.open("mispricing.csv");
        f << "block,timestamp,pool_price,pre_trade,window_best,volume_quote\n";
        char buf[256];
        for (const auto& s : series.samples) {
            std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(s.block),
                          s.timestamp, s.pool_price, s.pre_trade, s.window_best, s.volume_quote);
            f << buf;
        }
    }
    HistogramSpec amounts;
    amounts.lower = run.cfg.get_double_or("amount_lower", 0.0);
    amounts.upper = run.cfg.get_double_or("amount_upper", 50.0);
    amounts.bins = get_count(run.cfg, "amount_bins", 50);
    {
        auto f = run.open("activity.json");
        write_activity_json(f, daily_activity_report(swaps, ticks, amounts, run.cfg.get_double_or("max_gap", 60.0)));
    }
    run.extra["samples"] = series.samples.size();
    run.extra["skipped_gaps"] = series.skipped_gaps;
    run.extra["rejected_tick_rows"] = tick_report.errors.size();
    run.extra["rejected_swap_rows"] = swap_report.errors.size();
    std::printf("samples %zu, skipped (no quotes in window) %zu\n", series.samples.size(), series.skipped_gaps);
}

std::string iso_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_meta(const Run& run) {
    ordered_json j;
    j["command"] = run.command;
    j["version"] = kVersion;
    j["seed"] = run.seed;
    j["threads"] = run.threads;
    j["config"] = ordered_json::object();
    for (const auto& [k, v] : run.cfg.entries()) j["config"][k] = v;
    j["outputs"] = run.outputs;
    if (!run.extra.empty()) j["details"] = run.extra;
    j["run_timestamp"] = iso_now();
    std::ofstream f(run.out / "run_meta.json");
    f << j.dump(2) << '\n';
}

KeyValueConfig effective_config(const Globals& g) {
    KeyValueConfig cfg = g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) cfg.set(key, *v);
    };
    put("q_step", g.q);
    put("gamma_bp", g.gamma);
    put("gamma_cex_bp", g.gamma_cex);
    put("step_seconds", g.dt);
    put("sigma_daily", g.sigma);
    put("mu_daily", g.mu);
    put("p", g.p);
    if (g.n_points) cfg.set("n_points", static_cast<double>(*g.n_points));
    if (g.iterations) cfg.set("max_iterations", static_cast<double>(*g.iterations));
    for (const auto& kv : g.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Stationary mispricing model of CEX-DEX arbitrage: solver, estimators, simulator, calibration"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    app.set_version_flag("--version", kVersion);
    Globals g;
    app.add_option("--config", g.config, "Key-value config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed (overrides the seed key)");
    app.add_option("--threads", g.threads, "Worker thread cap")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--set", g.sets, "Override a config key (key=value), repeatable");
    app.add_option("--q", g.q, "Per-step jump probability (q_step)");
    app.add_option("--gamma", g.gamma, "Fee in basis points (gamma_bp)");
    app.add_option("--gamma-cex", g.gamma_cex, "CEX spread add-on in basis points (gamma_cex_bp)");
    app.add_option("--dt", g.dt, "Block time in seconds (step_seconds)");
    app.add_option("--sigma", g.sigma, "Daily volatility (sigma_daily)");
    app.add_option("--mu", g.mu, "Daily drift (mu_daily)");
    app.add_option("--p", g.p, "Arbitrageur arrival probability (p)");
    app.add_option("--n-points", g.n_points, "Grid points (n_points)");
    app.add_option("--iterations", g.iterations, "Iteration cap (max_iterations)");

    auto* solve = app.add_subcommand("solve", "Stationary density and convergence trace");
    auto* fit = app.add_subcommand("fit", "Threshold jump-diffusion fit over a tau sweep");
    std::string fit_input;
    fit->add_option("--input", fit_input, "Price CSV (timestamp,price)")->check(CLI::ExistingFile);
    auto* estimate = app.add_subcommand("estimate", "Trade frequency, profit and volume report");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of the clamped chain");
    bool compare = false;
    simulate->add_flag("--compare", compare, "Also solve and report the solver-simulator gap");
    auto* reproduce = app.add_subcommand("reproduce", "Reference trade-region and profit tables");
    std::string cells;
    std::optional<std::size_t> budget;
    std::string table = "both";
    reproduce->add_option("--cells", cells, "Restrict to cells, e.g. 12sec:30bp,10min:1bp");
    reproduce->add_option("--max-iterations", budget, "Cap the iterations of every cell");
    reproduce->add_option("--table", table, "trade, profit or both")->capture_default_str();
    auto* histogram = app.add_subcommand("histogram", "Mispricing histograms from tick and swap files");
    std::string ticks_path;
    std::string swaps_path;
    histogram->add_option("--ticks", ticks_path, "Ticks CSV (timestamp,venue,bid,ask)");
    histogram->add_option("--swaps", swaps_path, "Swaps CSV (block,timestamp,direction,amount_in,amount_out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        Run run;
        run.command = app.get_subcommands().front()->get_name();
        run.cfg = effective_config(g);
        run.seed = g.seed ? *g.seed : static_cast<std::uint64_t>(run.cfg.get_double_or("seed", 0.0));
        run.cfg.set("seed", std::to_string(run.seed));
        run.threads = g.threads;
        run.out = g.out;
        fs::create_directories(run.out);

        if (*solve) cmd_solve(run);
        if (*fit) cmd_fit(run, fit_input);
        if (*estimate) cmd_estimate(run);
        if (*simulate) cmd_simulate(run, compare);
        if (*reproduce) cmd_reproduce(run, cells, budget, table);
        if (*histogram) cmd_histogram(run, ticks_path, swaps_path);
        write_meta(run);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace
}  // namespace arb

int main(int argc, char** argv) { return arb::run_main(argc, argv); }
