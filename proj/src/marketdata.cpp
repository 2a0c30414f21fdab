#include "arb/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string_view>
#include <unordered_map>

#include "arb/kernel.hpp"
#include "json.hpp"

namespace arb {

namespace {

constexpr double kMaxRejectedFraction = 0.01;
constexpr std::size_t kErrorsInMessage = 5;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& v) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

bool parse_u64(std::string_view s, std::uint64_t& v) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Reads data rows, skipping a matching header, and applies the rejection
// threshold. `parse` returns an empty string on success or the reason.
template <class Row, class Parse>
std::vector<Row> read_rows(std::istream& in, std::string_view header, std::size_t fields, LoadReport* report,
                           const char* what, Parse parse) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    rep = LoadReport{};
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (line_no == 1 && view == header) continue;
        ++rep.rows;
        const auto cols = split(view);
        std::string reason;
        Row row;
        if (cols.size() != fields)
            reason = "expected " + std::to_string(fields) + " fields, got " + std::to_string(cols.size());
        else
            reason = parse(cols, row);
        if (reason.empty())
            rows.push_back(std::move(row));
        else
            rep.errors.push_back("line " + std::to_string(line_no) + ": " + reason);
    }
    if (in.bad()) throw DataError(std::string("read error in ") + what + " input");
    if (rep.rows == 0) rep.warnings.push_back(std::string("no ") + what + " rows found");
    if (static_cast<double>(rep.errors.size()) > kMaxRejectedFraction * static_cast<double>(rep.rows)) {
        std::string msg = std::to_string(rep.errors.size()) + " of " + std::to_string(rep.rows) + " " + what +
                          " rows are malformed (limit 1%)";
        for (std::size_t i = 0; i < std::min(kErrorsInMessage, rep.errors.size()); ++i) msg += "\n  " + rep.errors[i];
        throw DataError(msg);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
    return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::int64_t day_of(double t) { return static_cast<std::int64_t>(std::floor(t / kSecondsPerDay)); }

std::string date_string(std::int64_t day) {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

double cex_side(const Quote& q, SwapDirection d) { return d == SwapDirection::BaseToQuote ? q.ask : q.bid; }

// Best quotes from each venue's latest tick at or before t, ignoring ticks
// older than `stale_after`.
std::optional<Quote> latest_quotes(const std::vector<PriceTick>& ticks, double t, double stale_after) {
    auto it = std::upper_bound(ticks.begin(), ticks.end(), t,
                               [](double v, const PriceTick& k) { return v < k.timestamp; });
    std::set<std::string_view> seen;
    std::optional<Quote> best;
    while (it != ticks.begin()) {
        --it;
        if (it->timestamp < t - stale_after) break;
        if (!seen.insert(it->venue).second) continue;
        if (!best) {
            best = Quote{it->bid, it->ask};
        } else {
            best->bid = std::max(best->bid, it->bid);
            best->ask = std::min(best->ask, it->ask);
        }
    }
    return best;
}

}  // namespace

double SwapRecord::implied_price() const {
    return direction == SwapDirection::BaseToQuote ? amount_out / amount_in : amount_in / amount_out;
}

double SwapRecord::base_amount() const { return direction == SwapDirection::BaseToQuote ? amount_in : amount_out; }

double SwapRecord::quote_amount() const { return direction == SwapDirection::BaseToQuote ? amount_out : amount_in; }

std::vector<PriceTick> read_ticks(std::istream& in, LoadReport* report) {
    return read_rows<PriceTick>(in, "timestamp,venue,bid,ask", 4, report, "tick",
                                [](const std::vector<std::string_view>& c, PriceTick& t) -> std::string {
                                    if (!parse_double(c[0], t.timestamp)) return "bad timestamp";
                                    if (c[1].empty()) return "empty venue";
                                    t.venue = std::string(c[1]);
                                    if (!parse_double(c[2], t.bid)) return "bad bid";
                                    if (!parse_double(c[3], t.ask)) return "bad ask";
                                    if (!(t.bid > 0.0) || !(t.ask > 0.0)) return "non-positive price";
                                    if (t.bid > t.ask) return "bid above ask";
                                    return {};
                                });
}

std::vector<SwapRecord> read_swaps(std::istream& in, LoadReport* report) {
    return read_rows<SwapRecord>(in, "block,timestamp,direction,amount_in,amount_out", 5, report, "swap",
                                 [](const std::vector<std::string_view>& c, SwapRecord& s) -> std::string {
                                     if (!parse_u64(c[0], s.block)) return "bad block number";
                                     if (!parse_double(c[1], s.timestamp)) return "bad timestamp";
                                     if (c[2] == "base_to_quote")
                                         s.direction = SwapDirection::BaseToQuote;
                                     else if (c[2] == "quote_to_base")
                                         s.direction = SwapDirection::QuoteToBase;
                                     else
                                         return "direction must be base_to_quote or quote_to_base";
                                     if (!parse_double(c[3], s.amount_in)) return "bad amount_in";
                                     if (!parse_double(c[4], s.amount_out)) return "bad amount_out";
                                     if (!(s.amount_in > 0.0) || !(s.amount_out > 0.0)) return "non-positive amount";
                                     return {};
                                 });
}

std::vector<PriceTick> load_ticks(const std::filesystem::path& path, LoadReport* report) {
    auto in = open_input(path);
    return read_ticks(in, report);
}

std::vector<SwapRecord> load_swaps(const std::filesystem::path& path, LoadReport* report) {
    auto in = open_input(path);
    return read_swaps(in, report);
}

void write_ticks(std::ostream& out, const std::vector<PriceTick>& ticks) {
    out << "timestamp,venue,bid,ask\n";
    for (const PriceTick& t : ticks) out << fmt(t.timestamp) << ',' << t.venue << ',' << fmt(t.bid) << ',' << fmt(t.ask) << '\n';
}

void write_swaps(std::ostream& out, const std::vector<SwapRecord>& swaps) {
    out << "block,timestamp,direction,amount_in,amount_out\n";
    for (const SwapRecord& s : swaps)
        out << s.block << ',' << fmt(s.timestamp) << ','
            << (s.direction == SwapDirection::BaseToQuote ? "base_to_quote" : "quote_to_base") << ',' << fmt(s.amount_in)
            << ',' << fmt(s.amount_out) << '\n';
}

std::optional<Quote> best_cross_venue(const std::vector<PriceTick>& ticks, double t, double window, double delay) {
    if (!(window > 0.0)) throw InvalidArgument("window must be positive");
    const double start = t - delay;
    const double end = start + window;
    auto it = std::lower_bound(ticks.begin(), ticks.end(), start,
                               [](const PriceTick& k, double v) { return k.timestamp < v; });
    std::optional<Quote> best;
    for (; it != ticks.end() && it->timestamp <= end; ++it) {
        if (!best) {
            best = Quote{it->bid, it->ask};
        } else {
            best->bid = std::max(best->bid, it->bid);
            best->ask = std::min(best->ask, it->ask);
        }
    }
    return best;
}

double pre_trade_pool_price(const SwapRecord& swap, const MispriceSettings& settings) {
    const double keep = 1.0 - settings.pool_fee;
    if (!settings.liquidity) {
        // Fee-exclusive execution price.
        return swap.direction == SwapDirection::BaseToQuote ? swap.amount_out / (keep * swap.amount_in)
                                                            : keep * swap.amount_in / swap.amount_out;
    }
    const double l2 = *settings.liquidity * *settings.liquidity;
    if (swap.direction == SwapDirection::BaseToQuote) {
        // Pool receives a = keep * in of base: out = L^2 a / (x (x + a)), solve for x.
        const double a = keep * swap.amount_in;
        const double x = 0.5 * (-a + std::sqrt(a * a + 4.0 * l2 * a / swap.amount_out));
        return l2 / (x * x);
    }
    const double b = keep * swap.amount_in;
    const double y = 0.5 * (-b + std::sqrt(b * b + 4.0 * l2 * b / swap.amount_out));
    return y * y / l2;
}

MispriceSeries mispricing_series(const std::vector<SwapRecord>& swaps, const std::vector<PriceTick>& ticks,
                                 const MispriceSettings& settings) {
    if (!(settings.window > 0.0)) throw InvalidArgument("window must be positive");
    if (!(settings.pool_fee >= 0.0 && settings.pool_fee < 1.0)) throw InvalidArgument("pool fee must be in [0, 1)");
    if (settings.liquidity && !(*settings.liquidity > 0.0)) throw InvalidArgument("liquidity must be positive");
    MispriceSeries out;
    for (std::size_t i = 0; i < swaps.size(); ++i) {
        const SwapRecord& s = swaps[i];
        const auto window = best_cross_venue(ticks, s.timestamp, settings.window, settings.delay);
        if (!window) {
            ++out.skipped_gaps;
            continue;
        }
        MispriceSample m;
        m.swap_index = i;
        m.block = s.block;
        m.timestamp = s.timestamp;
        m.pool_price = pre_trade_pool_price(s, settings);
        m.window_best = std::log(cex_side(*window, s.direction) / m.pool_price);
        const auto latest = latest_quotes(ticks, s.timestamp, settings.stale_after);
        m.pre_trade = latest ? std::log(cex_side(*latest, s.direction) / m.pool_price) : m.window_best;
        m.volume_quote = s.quote_amount();
        if (!std::isfinite(m.window_best) || !std::isfinite(m.pre_trade))
            throw NumericalError("non-finite mispricing for swap in block " + std::to_string(s.block));
        out.samples.push_back(m);
    }
    return out;
}

void HistogramSpec::validate() const {
    if (!(upper > lower)) throw InvalidArgument("histogram upper bound must exceed the lower bound");
    if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
}

std::size_t HistogramSpec::index(double x) const {
    if (!(x > lower)) return 0;
    const auto k = static_cast<std::size_t>((x - lower) / width());
    return std::min(k, bins - 1);
}

std::size_t distinct_days(const std::vector<double>& timestamps) {
    std::set<std::int64_t> days;
    for (double t : timestamps) days.insert(day_of(t));
    return days.size();
}

std::vector<HistogramRow> misprice_histograms(const std::vector<MispriceSample>& samples, const HistogramSpec& spec) {
    spec.validate();
    if (samples.empty()) throw InvalidArgument("misprice_histograms needs at least one sample");
    std::vector<double> ts;
    ts.reserve(samples.size());
    for (const auto& s : samples) ts.push_back(s.timestamp);
    const auto days = static_cast<double>(distinct_days(ts));
    std::vector<double> count(spec.bins, 0.0);
    std::vector<double> volume(spec.bins, 0.0);
    for (const auto& s : samples) {
        const std::size_t k = spec.index(s.window_best);
        count[k] += 1.0;
        volume[k] += s.volume_quote;
    }
    std::vector<HistogramRow> rows(spec.bins);
    for (std::size_t k = 0; k < spec.bins; ++k) rows[k] = {spec.midpoint(k), count[k] / days, volume[k] / days};
    return rows;
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows) {
    out << "bin_midpoint,count_per_day,volume_per_day\n";
    for (const auto& r : rows) out << fmt(r.midpoint) << ',' << fmt(r.count_per_day) << ',' << fmt(r.volume_per_day) << '\n';
}

ActivityReport daily_activity_report(const std::vector<SwapRecord>& swaps, const std::vector<PriceTick>& ticks,
                                     const HistogramSpec& amount_spec, double max_gap) {
    amount_spec.validate();
    if (!(max_gap > 0.0)) throw InvalidArgument("max_gap must be positive");
    std::map<std::int64_t, DayActivity> days;
    auto day_entry = [&](std::int64_t d) -> DayActivity& {
        auto [it, inserted] = days.try_emplace(d);
        if (inserted) {
            it->second.day = d;
            it->second.date = date_string(d);
        }
        return it->second;
    };
    for (const auto& s : swaps) ++day_entry(day_of(s.timestamp)).swap_count;

    // Ticks per day and venue, in time order.
    std::map<std::int64_t, std::unordered_map<std::string, std::vector<const PriceTick*>>> by_day;
    for (const auto& t : ticks) {
        const std::int64_t d = day_of(t.timestamp);
        ++day_entry(d).tick_count;
        by_day[d][t.venue].push_back(&t);
    }
    for (auto& [d, venues] : by_day) {
        // Busiest venue, ties to the smallest name so the choice is deterministic.
        const std::vector<const PriceTick*>* series = nullptr;
        std::string name;
        for (const auto& [v, list] : venues)
            if (!series || list.size() > series->size() || (list.size() == series->size() && v < name)) {
                series = &list;
                name = v;
            }
        DayActivity& day = days[d];
        const double day_start = static_cast<double>(d) * kSecondsPerDay;
        double gap = series->front()->timestamp - day_start;
        double sum_sq = 0.0;
        for (std::size_t i = 1; i < series->size(); ++i) {
            const PriceTick& a = *(*series)[i - 1];
            const PriceTick& b = *(*series)[i];
            gap = std::max(gap, b.timestamp - a.timestamp);
            const double r = std::log((b.bid + b.ask) / (a.bid + a.ask));
            sum_sq += r * r;
        }
        gap = std::max(gap, day_start + kSecondsPerDay - series->back()->timestamp);
        day.max_gap_seconds = gap;
        if (gap <= max_gap) day.volatility_pct = 100.0 * std::sqrt(sum_sq);
    }

    ActivityReport report;
    report.amount_spec = amount_spec;
    report.amount_counts.assign(amount_spec.bins, 0.0);
    for (const auto& s : swaps) report.amount_counts[amount_spec.index(s.base_amount())] += 1.0;
    for (auto& [d, day] : days) report.days.push_back(std::move(day));
    return report;
}

void write_activity_json(std::ostream& out, const ActivityReport& report) {
    nlohmann::ordered_json j;
    j["days"] = nlohmann::ordered_json::array();
    for (const auto& d : report.days) {
        nlohmann::ordered_json row;
        row["date"] = d.date;
        row["volatility_pct"] = d.volatility_pct ? nlohmann::ordered_json(*d.volatility_pct) : nlohmann::ordered_json(nullptr);
        row["swap_count"] = d.swap_count;
        row["tick_count"] = d.tick_count;
        row["max_gap_seconds"] = d.max_gap_seconds;
        j["days"].push_back(row);
    }
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < report.amount_counts.size(); ++k)
        hist.push_back({{"bin_midpoint", report.amount_spec.midpoint(k)}, {"count", report.amount_counts[k]}});
    j["base_amount_histogram"] = hist;
    out << j.dump(2) << '\n';
}

}  // namespace arb
