#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace aqcast::metrics {

inline constexpr double kMapeZeroThreshold = 1e-12;
inline constexpr double kR2ConstantThreshold = 1e-24;

struct MapeResult {
    std::optional<double> percent; // empty when every term was excluded
    std::size_t excluded = 0;
};

/// Error metrics for one (series, model) pair, in original units.
struct EvalReport {
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> mape_percent;
    std::size_t mape_excluded = 0;
    std::optional<double> r2;
    std::size_t n = 0;

    bool operator==(const EvalReport&) const = default;
};

double mse(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

// Terms with |actual| below the threshold are skipped and counted.
MapeResult mape(std::span<const double> actual, std::span<const double> predicted,
                double zero_threshold = kMapeZeroThreshold);

// Empty for constant actuals; negative for fits worse than the mean.
std::optional<double> r2(std::span<const double> actual, std::span<const double> predicted);

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted);

} // namespace aqcast::metrics
