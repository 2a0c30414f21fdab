#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace arb {

// Raised when an input file cannot be read or has too many malformed rows.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PriceTick {
    double timestamp = 0.0;  // UNIX seconds
    std::string venue;
    double bid = 0.0;
    double ask = 0.0;
};

enum class SwapDirection { BaseToQuote, QuoteToBase };

struct SwapRecord {
    std::uint64_t block = 0;
    double timestamp = 0.0;
    SwapDirection direction = SwapDirection::BaseToQuote;
    double amount_in = 0.0;
    double amount_out = 0.0;

    // Execution price in quote per base.
    double implied_price() const;
    double base_amount() const;
    double quote_amount() const;
};

struct LoadReport {
    std::size_t rows = 0;  // data rows read, valid or not
    std::vector<std::string> errors;  // "line N: reason"
    std::vector<std::string> warnings;
};

// Both loaders sort by timestamp (stable) and reject rows that fail to parse
// or violate an invariant; more than 1% rejected rows raises DataError.
std::vector<PriceTick> load_ticks(const std::filesystem::path& path, LoadReport* report = nullptr);
std::vector<SwapRecord> load_swaps(const std::filesystem::path& path, LoadReport* report = nullptr);
std::vector<PriceTick> read_ticks(std::istream& in, LoadReport* report = nullptr);
std::vector<SwapRecord> read_swaps(std::istream& in, LoadReport* report = nullptr);
void write_ticks(std::ostream& out, const std::vector<PriceTick>& ticks);
void write_swaps(std::ostream& out, const std::vector<SwapRecord>& swaps);

struct Quote {
    double bid = 0.0;
    double ask = 0.0;
};

// Best bid and ask over all venues and all ticks with timestamp in
// [t - delay, t - delay + window]; empty when no tick falls in the window.
// `ticks` must be sorted by timestamp.
std::optional<Quote> best_cross_venue(const std::vector<PriceTick>& ticks, double t, double window = 12.0,
                                      double delay = 8.0);

struct MispriceSettings {
    double window = 12.0;
    double delay = 8.0;
    double pool_fee = 0.003;
    // CPMM invariant sqrt(x*y); when set, the pre-trade pool price is solved
    // exactly from the swap amounts, otherwise the fee-exclusive execution
    // price is used.
    std::optional<double> liquidity;
    double stale_after = 60.0;  // seconds a venue's last quote stays valid
};

struct MispriceSample {
    std::size_t swap_index = 0;
    std::uint64_t block = 0;
    double timestamp = 0.0;
    double pool_price = 0.0;     // pre-trade P~
    double pre_trade = 0.0;      // ln(P/P~) against the latest quotes at the swap time
    double window_best = 0.0;    // ln(P/P~) against best_cross_venue
    double volume_quote = 0.0;
};

struct MispriceSeries {
    std::vector<MispriceSample> samples;
    std::size_t skipped_gaps = 0;
};

// Pre-trade pool price of a swap (quote per base).
double pre_trade_pool_price(const SwapRecord& swap, const MispriceSettings& settings);

// z > 0 when the CEX price is above the pool price. The CEX side is the ask
// for base_to_quote swaps (the pool buys base) and the bid for quote_to_base.
MispriceSeries mispricing_series(const std::vector<SwapRecord>& swaps, const std::vector<PriceTick>& ticks,
                                 const MispriceSettings& settings = {});

struct HistogramSpec {
    double lower = -0.01;
    double upper = 0.01;
    std::size_t bins = 40;

    void validate() const;
    double width() const { return (upper - lower) / static_cast<double>(bins); }
    double midpoint(std::size_t k) const { return lower + (static_cast<double>(k) + 0.5) * width(); }
    // Out-of-range values go to the end bins so totals are conserved.
    std::size_t index(double x) const;
};

struct HistogramRow {
    double midpoint = 0.0;
    double count_per_day = 0.0;
    double volume_per_day = 0.0;
};

// Number of distinct UTC days touched by the timestamps.
std::size_t distinct_days(const std::vector<double>& timestamps);

// Count and volume histograms of the window-best mispricing, divided by the
// number of distinct UTC days in the sample.
std::vector<HistogramRow> misprice_histograms(const std::vector<MispriceSample>& samples, const HistogramSpec& spec);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows);

struct DayActivity {
    std::int64_t day = 0;  // UNIX day number
    std::string date;      // YYYY-MM-DD
    std::optional<double> volatility_pct;  // empty when the day has a feed gap
    std::size_t swap_count = 0;
    std::size_t tick_count = 0;
    double max_gap_seconds = 0.0;
};

struct ActivityReport {
    std::vector<DayActivity> days;
    HistogramSpec amount_spec;
    std::vector<double> amount_counts;  // histogram of base amounts per swap
};

// Daily realized volatility (square root of the summed squared log-returns of
// the busiest venue's mid price) next to the daily swap count. Days whose
// tick feed has a gap longer than `max_gap` seconds report no volatility.
ActivityReport daily_activity_report(const std::vector<SwapRecord>& swaps, const std::vector<PriceTick>& ticks,
                                     const HistogramSpec& amount_spec, double max_gap = 60.0);
void write_activity_json(std::ostream& out, const ActivityReport& report);

}  // namespace arb
