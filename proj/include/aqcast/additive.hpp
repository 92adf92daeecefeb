#pragma once

#include "aqcast/series.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aqcast::additive {

struct Seasonality {
    double period_months = 12.0;
    std::size_t fourier_order = 6;

    bool operator==(const Seasonality&) const = default;
};

/// Weekly period expressed in months; accepted in configs, never fitted at
/// monthly sampling.
inline constexpr double kWeeklyPeriodMonths = 7.0 / 30.4375;

struct EventSpec {
    std::string name;
    std::vector<MonthStamp> months;

    bool operator==(const EventSpec&) const = default;
};

struct AdditiveConfig {
    std::size_t n_changepoints = 25;
    double changepoint_range = 0.8;
    /// Ridge weight on changepoint slope adjustments.
    double trend_penalty = 10.0;
    /// Ridge weight on Fourier coefficients and event effects.
    double seasonality_penalty = 0.1;
    std::vector<Seasonality> seasonalities{{12.0, 6}};
    std::vector<EventSpec> events;

    void validate() const;

    bool operator==(const AdditiveConfig&) const = default;
};

struct FittedSeasonality {
    Seasonality spec;
    /// Interleaved (cos_n, sin_n) for n = 1..order.
    std::vector<double> coeffs;

    double harmonic_amplitude(std::size_t n) const;
};

struct EventEffect {
    EventSpec event;
    double effect = 0.0;
};

/// g(t) = m + k t + sum_j delta_j (t - s_j)_+,  s(t) = Fourier sums,
/// h(t) = sum of event effects active at the stamp.
struct AdditiveFit {
    double k = 0.0;
    double m = 0.0;
    std::vector<double> deltas;
    std::vector<double> changepoint_locs;
    std::vector<FittedSeasonality> seasonalities;
    std::vector<EventEffect> event_effects;
    double sigma_hat = 0.0;

    /// Stamp at model time 0 and months per unit of model time.
    MonthStamp origin{1970, 1};
    double months_per_unit = 0.0;

    /// Seasonalities dropped at fit time (e.g. periods shorter than the
    /// sampling interval).
    std::vector<std::string> diagnostics;

    double trend_at(double t) const;
    /// Average trend slope per month over the training span.
    double mean_monthly_slope() const;
};

struct AdditiveForecast {
    TimeSeries yhat;
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> events;
};

std::vector<double> place_changepoints(const ModelTime& train_t, const AdditiveConfig& cfg);

/// Columns [1, t, (t - s_1)_+, ..., (t - s_J)_+].
Eigen::MatrixXd trend_basis(const ModelTime& t, std::span<const double> changepoint_locs);

/// Columns cos(2 pi n tau / P), sin(2 pi n tau / P) for n = 1..order, with tau
/// in months since the first training stamp.
Eigen::MatrixXd fourier_basis(const ModelTime& t, double period_months, std::size_t order);

/// One 0/1 column per event.
Eigen::MatrixXd event_basis(std::span<const MonthStamp> stamps, std::span<const EventSpec> events);

/// Penalized least squares over the present rows of `train`, solved through
/// the ridge-augmented normal equations. k and m are unpenalized.
AdditiveFit fit(const TimeSeries& train, const AdditiveConfig& cfg);

AdditiveForecast predict(const AdditiveFit& fit, const ModelTime& horizon_t);

/// Model time for the `horizon` months following a training span of
/// `train_len` months.
ModelTime horizon_time(std::size_t train_len, std::size_t horizon);

} // namespace aqcast::additive
