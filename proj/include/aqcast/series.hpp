#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aqcast {

/// Calendar month. Ordering is lexicographic on (year, month).
class MonthStamp {
public:
    MonthStamp(int year, int month);

    int year() const noexcept { return year_; }
    int month() const noexcept { return month_; }

    MonthStamp plus_months(long months) const;
    /// Signed number of months from `origin` to this stamp.
    long months_since(const MonthStamp& origin) const noexcept;

    /// "YYYY-MM"
    std::string to_string() const;
    static MonthStamp parse(std::string_view text);

    auto operator<=>(const MonthStamp&) const = default;

private:
    int year_;
    int month_;
};

/// Monthly series with an explicit present/missing flag per point.
/// Timestamps are implied by start + index, so gaps are never absent rows.
class TimeSeries {
public:
    TimeSeries(MonthStamp start, std::vector<std::optional<double>> points);

    static TimeSeries from_values(MonthStamp start, std::span<const double> values);

    std::size_t size() const noexcept { return points_.size(); }
    const MonthStamp& start() const noexcept { return start_; }
    MonthStamp stamp(std::size_t i) const { return start_.plus_months(static_cast<long>(i)); }
    MonthStamp last_stamp() const { return stamp(size() - 1); }
    std::vector<MonthStamp> stamps() const;

    const std::optional<double>& operator[](std::size_t i) const { return points_[i]; }
    bool is_present(std::size_t i) const { return points_[i].has_value(); }
    std::size_t present_count() const noexcept;
    bool fully_present() const noexcept { return present_count() == size(); }

    const std::vector<std::optional<double>>& points() const noexcept { return points_; }

    /// Dense values. Throws InvalidInput if any point is missing.
    std::vector<double> values() const;

    TimeSeries slice(std::size_t begin, std::size_t count) const;

    bool operator==(const TimeSeries&) const = default;

private:
    MonthStamp start_;
    std::vector<std::optional<double>> points_;
};

enum class PollutantKind { CO, CO2, SO2, SO4, PM2_5, PM10 };

std::string_view to_string(PollutantKind kind);
PollutantKind parse_pollutant(std::string_view text);

/// Target pollutant series plus same-shaped exogenous meteorology.
class StationSeries {
public:
    StationSeries(std::string state, PollutantKind pollutant, TimeSeries target,
                  std::map<std::string, TimeSeries> exogenous = {});

    const std::string& state() const noexcept { return state_; }
    PollutantKind pollutant() const noexcept { return pollutant_; }
    const TimeSeries& target() const noexcept { return target_; }
    const std::map<std::string, TimeSeries>& exogenous() const noexcept { return exogenous_; }

    /// Same window applied to target and every exogenous channel.
    StationSeries slice(std::size_t begin, std::size_t count) const;

    bool operator==(const StationSeries&) const = default;

private:
    std::string state_;
    PollutantKind pollutant_;
    TimeSeries target_;
    std::map<std::string, TimeSeries> exogenous_;
};

/// Normalized abscissa: the first training stamp maps to 0, the last to 1,
/// and later stamps extrapolate past 1.
class ModelTime {
public:
    ModelTime(std::vector<double> t, double months_per_unit)
        : t_(std::move(t)), months_per_unit_(months_per_unit) {}

    std::size_t size() const noexcept { return t_.size(); }
    double operator[](std::size_t i) const { return t_[i]; }
    std::span<const double> values() const noexcept { return t_; }

    /// Number of calendar months covered by one unit of model time
    /// (training length minus one).
    double months_per_unit() const noexcept { return months_per_unit_; }
    double to_months(double t) const noexcept { return t * months_per_unit_; }

    ModelTime slice(std::size_t begin, std::size_t count) const;

private:
    std::vector<double> t_;
    double months_per_unit_;
};

std::vector<MonthStamp> stamp_range(MonthStamp start, std::size_t n);

ModelTime model_time(std::size_t series_len, std::size_t train_len);

} // namespace aqcast
