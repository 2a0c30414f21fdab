#pragma once

#include <array>
#include <cstddef>

// Published values used by the reproduction command and the acceptance suite.
namespace arb::reference {

inline constexpr std::array<double, 4> kStepSeconds = {600.0, 120.0, 12.0, 2.0};
inline constexpr std::array<double, 5> kGammaBp = {1.0, 5.0, 10.0, 30.0, 100.0};
inline constexpr std::array<double, 4> kJumpProbs = {0.0, 0.05, 0.1, 0.2};

// Base configuration of both tables: 5% daily volatility, drift sigma^2/2.
inline constexpr double kSigmaDaily = 0.05;
inline constexpr double kMuDaily = kSigmaDaily * kSigmaDaily / 2.0;

// Trade-region mass in percent, [step][gamma]: the reference values of the
// original closed-form study and the values a published solver reported.
inline constexpr std::array<std::array<double, 5>, 4> kTradeRegionReference = {{
    {96.7, 85.5, 74.7, 49.6, 22.8},
    {92.9, 72.5, 56.9, 30.5, 11.6},
    {80.7, 45.6, 29.5, 12.3, 4.0},
    {63.0, 25.4, 14.5, 5.4, 1.7},
}};
inline constexpr std::array<std::array<double, 5>, 4> kTradeRegionPublished = {{
    {96.8, 85.5, 74.6, 49.4, 20.8},
    {93.1, 72.6, 56.9, 30.5, 11.6},
    {81.9, 45.9, 29.6, 12.2, 4.0},
    {67.2, 26.2, 14.8, 5.4, 1.7},
}};

// Allowed absolute deviation (percentage points) from the reference column.
inline constexpr double trade_region_tolerance_pp(std::size_t step, std::size_t gamma) {
    if (step == 3 && gamma == 0) return 5.0;  // 2 s, 1 bp: slow cell
    if (step == 0 && gamma == 4) return 2.5;  // 10 min, 100 bp
    return 0.5;
}

// CFMM profit per unit L*W^theta at theta = 0.5, [step][q][gamma].
inline constexpr std::array<std::array<std::array<double, 5>, 4>, 4> kArbProfit = {{
    {{
        {0.00202760, 0.00175490, 0.00149120, 0.00087340, 0.00023100},
        {0.00583060, 0.00536270, 0.00485070, 0.00328570, 0.00062900},
        {0.00855130, 0.00794330, 0.00725320, 0.00500800, 0.00091520},
        {0.01199680, 0.01121090, 0.01029490, 0.00718960, 0.00129170},
    }},
    {{
        {0.00009700, 0.00007500, 0.00005900, 0.00003200, 0.00001100},
        {0.00038730, 0.00034990, 0.00031370, 0.00021390, 0.00004600},
        {0.00066180, 0.00060930, 0.00055420, 0.00038560, 0.00007800},
        {0.00116750, 0.00108700, 0.00099710, 0.00070100, 0.00013500},
    }},
    {{
        {0.00000084, 0.00000047, 0.00000030, 0.00000013, 0.00000004},
        {0.00000460, 0.00000400, 0.00000360, 0.00000250, 0.00000052},
        {0.00000860, 0.00000780, 0.00000710, 0.00000500, 0.00000100},
        {0.00001800, 0.00001700, 0.00001500, 0.00001100, 0.00000220},
    }},
    {{
        {0.00000002, 0.00000001, 0.00000000, 0.00000000, 0.00000000},
        {0.00000013, 0.00000011, 0.00000010, 0.00000007, 0.00000001},
        {0.00000025, 0.00000022, 0.00000020, 0.00000015, 0.00000003},
        {0.00000053, 0.00000049, 0.00000045, 0.00000032, 0.00000007},
    }},
}};

inline constexpr double kArbRelativeTolerance = 0.05;
inline constexpr double kArbAbsoluteTolerance = 1e-8;

// Threshold fit of a 12-second ETH-USDT series (September 2025).
struct FitRow {
    double tau;  // 0 for the pure-diffusion row
    double log_likelihood;
    double sigma;
    double mu;
    double jump_mean;
    double jump_std;
    double q;
};

inline constexpr std::array<FitRow, 15> kFitTable = {{
    {0.0, 6.6192, 0.0234, 0.0234, 0.0, 0.0, 0.0},
    {1.5, 7.6895, 0.0234, 0.0517, -0.0699, 0.1649, 0.0582},
    {1.6, 7.6901, 0.0234, 0.0550, -0.0911, 0.1710, 0.0541},
    {1.7, 7.6903, 0.0234, 0.0587, -0.1165, 0.1767, 0.0506},
    {1.8, 7.6901, 0.0234, 0.0597, -0.1321, 0.1820, 0.0476},
    {1.9, 7.6896, 0.0234, 0.0598, -0.1466, 0.1883, 0.0443},
    {2.0, 7.6886, 0.0234, 0.0677, -0.2035, 0.1952, 0.0411},
    {2.1, 7.6875, 0.0234, 0.0724, -0.2498, 0.2018, 0.0384},
    {2.2, 7.6862, 0.0234, 0.0798, -0.3135, 0.2075, 0.0362},
    {2.3, 7.6847, 0.0234, 0.0791, -0.3350, 0.2138, 0.0340},
    {2.4, 7.6828, 0.0234, 0.0778, -0.3571, 0.2211, 0.0317},
    {2.5, 7.6809, 0.0234, 0.0799, -0.4027, 0.2281, 0.0297},
    {3.0, 7.6709, 0.0234, 0.0587, -0.3345, 0.2581, 0.0228},
    {3.5, 7.6603, 0.0234, 0.0470, -0.2828, 0.2868, 0.0182},
    {4.0, 7.6498, 0.0234, 0.0349, -0.1623, 0.3155, 0.0148},
}};
inline constexpr std::size_t kFitRowTau2 = 6;

// The jump law used for the q > 0 rows of the profit table (daily units).
inline constexpr double kProfitJumpMeanDaily = -0.2035;
inline constexpr double kProfitJumpStdDaily = 0.1952;

// Daily arbitrage activity of a $86M CPMM pool, 30 bp fee, 12 s blocks.
inline constexpr double kPoolTvl = 86e6;
inline constexpr double kPoolGammaBp = 30.0;
inline constexpr double kModelVolumeUp = 1'881'277.0;
inline constexpr double kModelVolumeDown = 1'838'985.0;
inline constexpr double kModelProfit = 1'454.0;
inline constexpr double kModelSwapsUp = 256.0;
inline constexpr double kModelSwapsDown = 251.0;
inline constexpr double kVolumeTolerance = 0.30;
inline constexpr double kVolumeToProfitLow = 1100.0;
inline constexpr double kVolumeToProfitHigh = 1500.0;

}  // namespace arb::reference
