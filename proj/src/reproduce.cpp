#include "arb/reproduce.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "arb/estimators.hpp"
#include "arb/reference_tables.hpp"
#include "arb/stationary.hpp"

namespace arb {

namespace {

StationaryResult solve_cell(const ModelParams& m, double gamma_bp, std::size_t iterations,
                            const ReproduceSettings& settings) {
    SolveSettings s;
    s.n_points = settings.n_points;
    s.max_iterations = iterations;
    s.l1_tolerance = settings.l1_tolerance;
    s.threads = settings.threads;
    return solve_stationary(m, FeeBand::symmetric_bp(gamma_bp), s);
}

std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

void ReproduceSettings::validate() const {
    if (n_points < 3 || n_points % 2 == 0) throw InvalidArgument("n_points must be odd and >= 3");
    if (trade_iterations < 1 || profit_iterations < 1) throw InvalidArgument("iteration budgets must be >= 1");
    if (!(l1_tolerance > 0.0)) throw InvalidArgument("l1_tolerance must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must be in (0, 1)");
    if (!(jump_std_daily >= 0.0)) throw InvalidArgument("jump_std_daily must be non-negative");
}

ModelParams table_params(double step_seconds, double q, const ReproduceSettings& settings) {
    DailyParams d;
    d.sigma_daily = reference::kSigmaDaily;
    d.mu_daily = reference::kMuDaily;
    d.step_seconds = step_seconds;
    d.q_step = q;
    d.jump_mean_daily = q > 0.0 ? settings.jump_mean_daily : 0.0;
    d.jump_std_daily = q > 0.0 ? settings.jump_std_daily : reference::kSigmaDaily;
    d.p = 1.0;
    return from_daily(d, settings.noise ? settings.noise : gaussian_noise());
}

double TradeRegionCell::abs_error_pp() const { return std::abs(computed_pct - reference_pct); }

double ProfitCell::tolerance() const {
    return std::max(reference::kArbRelativeTolerance * reference, reference::kArbAbsoluteTolerance);
}

bool ProfitCell::pass() const { return std::abs(computed - reference) <= tolerance(); }

TradeRegionCell compute_trade_region_cell(std::size_t si, std::size_t gi, const ReproduceSettings& settings) {
    settings.validate();
    if (si >= reference::kStepSeconds.size() || gi >= reference::kGammaBp.size())
        throw InvalidArgument("trade-region cell index out of range");
    TradeRegionCell c;
    c.step_index = si;
    c.gamma_index = gi;
    c.step_seconds = reference::kStepSeconds[si];
    c.gamma_bp = reference::kGammaBp[gi];
    c.reference_pct = reference::kTradeRegionReference[si][gi];
    c.published_pct = reference::kTradeRegionPublished[si][gi];
    c.tolerance_pp = reference::trade_region_tolerance_pp(si, gi);
    const ModelParams m = table_params(c.step_seconds, 0.0, settings);
    const StationaryResult r = solve_cell(m, c.gamma_bp, settings.trade_iterations, settings);
    c.computed_pct = 100.0 * trade_region_mass(r.density, FeeBand::symmetric_bp(c.gamma_bp));
    c.iterations = r.trace.iterations;
    c.converged = r.trace.converged;
    return c;
}

ProfitCell compute_profit_cell(std::size_t si, std::size_t qi, std::size_t gi, const ReproduceSettings& settings) {
    settings.validate();
    if (si >= reference::kStepSeconds.size() || qi >= reference::kJumpProbs.size() || gi >= reference::kGammaBp.size())
        throw InvalidArgument("profit cell index out of range");
    ProfitCell c;
    c.step_index = si;
    c.q_index = qi;
    c.gamma_index = gi;
    c.step_seconds = reference::kStepSeconds[si];
    c.q = reference::kJumpProbs[qi];
    c.gamma_bp = reference::kGammaBp[gi];
    c.reference = reference::kArbProfit[si][qi][gi];
    const ModelParams m = table_params(c.step_seconds, c.q, settings);
    const StationaryResult r = solve_cell(m, c.gamma_bp, settings.profit_iterations, settings);
    c.computed = arb_profit_ratio(r.density, FeeBand::symmetric_bp(c.gamma_bp), m, settings.theta);
    c.iterations = r.trace.iterations;
    c.converged = r.trace.converged;
    return c;
}

double parse_step_label(const std::string& label) {
    double value = 0.0;
    const char* begin = label.data();
    const char* end = label.data() + label.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw InvalidArgument("bad block-time label '" + label + "'");
    const std::string unit(ptr, end);
    if (unit == "s" || unit == "sec") return value;
    if (unit == "min" || unit == "m") return 60.0 * value;
    throw InvalidArgument("bad block-time unit in '" + label + "' (expected s, sec or min)");
}

std::string step_label(double step_seconds) {
    if (step_seconds >= 60.0 && std::fmod(step_seconds, 60.0) == 0.0) return fmt(step_seconds / 60.0, "%g") + "min";
    return fmt(step_seconds, "%g") + "sec";
}

CellFilter CellFilter::parse(const std::string& text) {
    CellFilter f;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvalidArgument("cell '" + item + "' must look like 12sec:30bp");
        const double step = parse_step_label(item.substr(0, colon));
        std::string gamma = item.substr(colon + 1);
        if (gamma.size() > 2 && gamma.compare(gamma.size() - 2, 2, "bp") == 0) gamma.resize(gamma.size() - 2);
        double g = 0.0;
        const auto [ptr, ec] = std::from_chars(gamma.data(), gamma.data() + gamma.size(), g);
        if (ec != std::errc() || ptr != gamma.data() + gamma.size()) throw InvalidArgument("bad fee in cell '" + item + "'");
        f.cells_.emplace_back(step, g);
    }
    return f;
}

bool CellFilter::keeps(double step_seconds, double gamma_bp) const {
    if (cells_.empty()) return true;
    return std::any_of(cells_.begin(), cells_.end(),
                       [&](const auto& c) { return c.first == step_seconds && c.second == gamma_bp; });
}

void write_trade_region_csv(std::ostream& out, const std::vector<TradeRegionCell>& cells) {
    out << "step,gamma_bp,reference_pct,published_pct,computed_pct,abs_error_pp,tolerance_pp,iterations,converged\n";
    for (const auto& c : cells)
        out << step_label(c.step_seconds) << ',' << fmt(c.gamma_bp, "%g") << ',' << fmt(c.reference_pct, "%.1f") << ','
            << fmt(c.published_pct, "%.1f") << ',' << fmt(c.computed_pct, "%.4f") << ',' << fmt(c.abs_error_pp(), "%.4f")
            << ',' << fmt(c.tolerance_pp, "%g") << ',' << c.iterations << ',' << (c.converged ? 1 : 0) << '\n';
}

void write_profit_csv(std::ostream& out, const std::vector<ProfitCell>& cells) {
    out << "step,q,gamma_bp,reference,computed,ratio,iterations,converged\n";
    for (const auto& c : cells) {
        const double ratio = c.computed > 0.0 ? c.reference / c.computed : 0.0;
        out << step_label(c.step_seconds) << ',' << fmt(c.q, "%g") << ',' << fmt(c.gamma_bp, "%g") << ','
            << fmt(c.reference, "%.8f") << ',' << fmt(c.computed, "%.6e") << ',' << fmt(ratio, "%.4g") << ','
            << c.iterations << ',' << (c.converged ? 1 : 0) << '\n';
    }
}

}  // namespace arb
