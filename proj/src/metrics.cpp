#include "aqcast/metrics.hpp"

#include "aqcast/error.hpp"

#include <cmath>
#include <string>

namespace aqcast::metrics {

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty()) {
        throw Error(ErrorCode::InvalidInput, "metrics need at least one observation");
    }
    if (actual.size() != predicted.size()) {
        throw Error(ErrorCode::InvalidInput,
                    "length mismatch: " + std::to_string(actual.size()) + " actual vs " +
                        std::to_string(predicted.size()) + " predicted");
    }
}

double sum_squared_error(std::span<const double> actual, std::span<const double> predicted) {
    double sse = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sse += e * e;
    }
    return sse;
}

} // namespace

double mse(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    return sum_squared_error(actual, predicted) / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    return std::sqrt(mse(actual, predicted));
}

MapeResult mape(std::span<const double> actual, std::span<const double> predicted,
                double zero_threshold) {
    check_pair(actual, predicted);
    MapeResult out;
    double total = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double denom = std::abs(actual[i]);
        if (denom < zero_threshold) {
            ++out.excluded;
            continue;
        }
        total += std::abs(actual[i] - predicted[i]) / denom;
        ++included;
    }
    if (included > 0) {
        out.percent = total / static_cast<double>(included) * 100.0;
    }
    return out;
}

std::optional<double> r2(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double mean = 0.0;
    for (double y : actual) {
        mean += y;
    }
    mean /= static_cast<double>(actual.size());
    double sst = 0.0;
    for (double y : actual) {
        sst += (y - mean) * (y - mean);
    }
    if (sst < kR2ConstantThreshold) {
        return std::nullopt;
    }
    return 1.0 - sum_squared_error(actual, predicted) / sst;
}

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
    EvalReport report;
    report.mse = mse(actual, predicted);
    report.rmse = std::sqrt(report.mse);
    const auto m = mape(actual, predicted);
    report.mape_percent = m.percent;
    report.mape_excluded = m.excluded;
    report.r2 = r2(actual, predicted);
    report.n = actual.size();
    return report;
}

} // namespace aqcast::metrics
