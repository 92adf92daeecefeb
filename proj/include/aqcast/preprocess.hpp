#pragma once

#include "aqcast/series.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace aqcast::preprocess {

/// Spread below which a fitted range counts as constant.
inline constexpr double kDegenerateSpread = 1e-12;

struct ScalerParams {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = true;

    bool operator==(const ScalerParams&) const = default;
};

struct SplitPair {
    TimeSeries train;
    TimeSeries test;
    std::size_t split_index;
};

/// Fills interior gaps on the straight line between the nearest present
/// neighbours; leading/trailing gaps take the nearest present value.
TimeSeries interpolate_linear(const TimeSeries& series);

/// Derived lag feature L[i] = series[i - lag], forward-filled from the most
/// recent present value at or before i - lag. Missing where none exists.
TimeSeries forward_fill_seasonal(const TimeSeries& series, std::size_t lag = 12);

ScalerParams fit_minmax(const TimeSeries& train);

// Degenerate params map everything to 0. No clipping.
std::vector<double> apply_minmax(std::span<const double> x, const ScalerParams& p);

// Degenerate params map everything back to min.
std::vector<double> invert_minmax(std::span<const double> z, const ScalerParams& p);

TimeSeries apply_minmax(const TimeSeries& series, const ScalerParams& p);

/// Train length is ceil(train_fraction * n); no shuffling.
SplitPair chrono_split(const TimeSeries& series, double train_fraction = 0.8);

std::size_t split_index(std::size_t n, double train_fraction);

} // namespace aqcast::preprocess
