#include "aqcast/preprocess.hpp"

#include "aqcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace aqcast::preprocess {

TimeSeries interpolate_linear(const TimeSeries& series) {
    const std::size_t n = series.size();
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < n; ++i) {
        if (series.is_present(i)) {
            anchors.push_back(i);
        }
    }
    if (anchors.empty()) {
        throw Error(ErrorCode::UnrecoverableSeries,
                    "series starting " + series.start().to_string() + " has no present values");
    }

    std::vector<std::optional<double>> out(n);
    const double first = *series[anchors.front()];
    const double last = *series[anchors.back()];
    for (std::size_t i = 0; i < anchors.front(); ++i) {
        out[i] = first;
    }
    for (std::size_t i = anchors.back(); i < n; ++i) {
        out[i] = series.is_present(i) ? *series[i] : last;
    }
    for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
        const std::size_t lo = anchors[a];
        const std::size_t hi = anchors[a + 1];
        const double y0 = *series[lo];
        const double y1 = *series[hi];
        out[lo] = y0;
        const double width = static_cast<double>(hi - lo);
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double w = static_cast<double>(i - lo) / width;
            out[i] = y0 + (y1 - y0) * w;
        }
    }
    return {series.start(), std::move(out)};
}

TimeSeries forward_fill_seasonal(const TimeSeries& series, std::size_t lag) {
    if (lag == 0) {
        throw Error(ErrorCode::InvalidInput, "seasonal lag must be at least 1");
    }
    const std::size_t n = series.size();
    std::vector<std::optional<double>> out(n);
    std::optional<double> carry;
    for (std::size_t i = lag; i < n; ++i) {
        const auto& source = series[i - lag];
        if (source) {
            carry = source;
        }
        out[i] = carry;
    }
    return {series.start(), std::move(out)};
}

ScalerParams fit_minmax(const TimeSeries& train) {
    std::optional<double> lo;
    std::optional<double> hi;
    for (const auto& p : train.points()) {
        if (!p) {
            continue;
        }
        lo = lo ? std::min(*lo, *p) : *p;
        hi = hi ? std::max(*hi, *p) : *p;
    }
    if (!lo) {
        throw Error(ErrorCode::UnrecoverableSeries, "cannot fit a scaler on an all-missing series");
    }
    return {*lo, *hi, (*hi - *lo) < kDegenerateSpread};
}

std::vector<double> apply_minmax(std::span<const double> x, const ScalerParams& p) {
    std::vector<double> out(x.size(), 0.0);
    if (p.degenerate) {
        return out;
    }
    const double range = p.max - p.min;
    std::transform(x.begin(), x.end(), out.begin(),
                   [&](double v) { return (v - p.min) / range; });
    return out;
}

std::vector<double> invert_minmax(std::span<const double> z, const ScalerParams& p) {
    std::vector<double> out(z.size(), p.min);
    if (p.degenerate) {
        return out;
    }
    const double range = p.max - p.min;
    std::transform(z.begin(), z.end(), out.begin(), [&](double v) { return v * range + p.min; });
    return out;
}

TimeSeries apply_minmax(const TimeSeries& series, const ScalerParams& p) {
    std::vector<std::optional<double>> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i]) {
            const double v = *series[i];
            out[i] = apply_minmax(std::span<const double>(&v, 1), p).front();
        }
    }
    return {series.start(), std::move(out)};
}

std::size_t split_index(std::size_t n, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidSplit, "train fraction must lie in (0, 1)");
    }
    if (n < 2) {
        throw Error(ErrorCode::InvalidSplit, "need at least 2 points to split");
    }
    // Guard against 0.8 * 60 landing a hair above 48 in floating point.
    const double raw = train_fraction * static_cast<double>(n);
    auto train = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::clamp<std::size_t>(train, 1, n - 1);
}

SplitPair chrono_split(const TimeSeries& series, double train_fraction) {
    const std::size_t n = series.size();
    const std::size_t k = split_index(n, train_fraction);
    return {series.slice(0, k), series.slice(k, n - k), k};
}

} // namespace aqcast::preprocess
