#pragma once

#include "aqcast/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aqcast::synth {

enum class RegimeKind { SeasonalTrend, StructuralBreak, NearConstant };

std::string_view to_string(RegimeKind kind);
RegimeKind parse_regime(std::string_view text); // seasonal | break | constant

/// Months over which a structural break recovers linearly back to trend.
inline constexpr std::size_t kBreakRecoveryMonths = 12;

struct RegimeSpec {
    RegimeKind kind = RegimeKind::SeasonalTrend;
    std::size_t n_months = 72;
    double base = 0.5;
    /// Per unit of normalized time i / (n_months - 1).
    double trend_slope = 0.3;
    double seasonal_amp = 0.2;
    double period_months = 12.0;
    double noise_sigma = 0.02;
    std::size_t break_month_index = 24;
    double break_drop_fraction = 0.5;
    double missing_fraction = 0.0;
    std::uint64_t seed = 0;

    MonthStamp start{2018, 1};
    std::string state = "SYNTH";
    PollutantKind pollutant = PollutantKind::CO;

    void validate() const;
};

/// Noise-free value at month index i.
double regime_mean(const RegimeSpec& spec, std::size_t i);

/// Draw order: one standard normal per month (Marsaglia polar), then a
/// Fisher-Yates shuffle of the indices whose first round(missing_fraction*n)
/// entries become missing.
StationSeries generate(const RegimeSpec& spec);

/// One series per seed; state labels are "<state>_<seed, 3 digits>".
std::vector<StationSeries> generate_suite(std::span<const std::uint64_t> seeds,
                                          const RegimeSpec& spec_template);

/// Last month before an 80/20 chronological split of `n_months`: a break
/// here lands right at the forecast origin.
std::size_t test_adjacent_break_index(std::size_t n_months);

/// Defaults for each regime as used by the `synth` command. The break regime
/// places its break at test_adjacent_break_index(n_months).
RegimeSpec default_spec(RegimeKind kind);

} // namespace aqcast::synth
