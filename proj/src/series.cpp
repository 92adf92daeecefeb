#include "aqcast/series.hpp"

#include "aqcast/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>

namespace aqcast {

MonthStamp::MonthStamp(int year, int month) : year_(year), month_(month) {
    if (month < 1 || month > 12) {
        throw Error(ErrorCode::InvalidInput, "month out of range: " + std::to_string(month));
    }
}

MonthStamp MonthStamp::plus_months(long months) const {
    const long index = static_cast<long>(year_) * 12 + (month_ - 1) + months;
    // floor division keeps negative offsets correct
    long year = index / 12;
    long rem = index % 12;
    if (rem < 0) {
        rem += 12;
        --year;
    }
    return {static_cast<int>(year), static_cast<int>(rem) + 1};
}

long MonthStamp::months_since(const MonthStamp& origin) const noexcept {
    return (static_cast<long>(year_) - origin.year_) * 12 + (month_ - origin.month_);
}

std::string MonthStamp::to_string() const {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d", year_, month_);
    return buf.data();
}

MonthStamp MonthStamp::parse(std::string_view text) {
    const auto fail = [&] {
        return Error(ErrorCode::Parse, "expected YYYY-MM date, got '" + std::string(text) + "'");
    };
    if (text.size() != 7 || text[4] != '-') {
        throw fail();
    }
    int year = 0;
    int month = 0;
    const auto* begin = text.data();
    if (std::from_chars(begin, begin + 4, year).ptr != begin + 4 ||
        std::from_chars(begin + 5, begin + 7, month).ptr != begin + 7) {
        throw fail();
    }
    if (month < 1 || month > 12) {
        throw fail();
    }
    return {year, month};
}

TimeSeries::TimeSeries(MonthStamp start, std::vector<std::optional<double>> points)
    : start_(start), points_(std::move(points)) {
    if (points_.empty()) {
        throw Error(ErrorCode::EmptyRange, "time series must hold at least one point");
    }
}

TimeSeries TimeSeries::from_values(MonthStamp start, std::span<const double> values) {
    return {start, std::vector<std::optional<double>>(values.begin(), values.end())};
}

std::vector<MonthStamp> TimeSeries::stamps() const {
    return stamp_range(start_, size());
}

std::size_t TimeSeries::present_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(points_.begin(), points_.end(), [](const auto& p) { return p.has_value(); }));
}

std::vector<double> TimeSeries::values() const {
    std::vector<double> out;
    out.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!points_[i]) {
            throw Error(ErrorCode::InvalidInput, "missing value at " + stamp(i).to_string());
        }
        out.push_back(*points_[i]);
    }
    return out;
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t count) const {
    if (count == 0 || begin + count > points_.size()) {
        throw Error(ErrorCode::EmptyRange, "slice out of range");
    }
    return {stamp(begin), {points_.begin() + static_cast<std::ptrdiff_t>(begin),
                           points_.begin() + static_cast<std::ptrdiff_t>(begin + count)}};
}

namespace {

constexpr std::array<std::pair<PollutantKind, std::string_view>, 6> kPollutantNames{{
    {PollutantKind::CO, "CO"},
    {PollutantKind::CO2, "CO2"},
    {PollutantKind::SO2, "SO2"},
    {PollutantKind::SO4, "SO4"},
    {PollutantKind::PM2_5, "PM2_5"},
    {PollutantKind::PM10, "PM10"},
}};

} // namespace

std::string_view to_string(PollutantKind kind) {
    for (const auto& [k, name] : kPollutantNames) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

PollutantKind parse_pollutant(std::string_view text) {
    for (const auto& [k, name] : kPollutantNames) {
        if (name == text) {
            return k;
        }
    }
    throw Error(ErrorCode::Parse, "unknown pollutant '" + std::string(text) + "'");
}

StationSeries::StationSeries(std::string state, PollutantKind pollutant, TimeSeries target,
                             std::map<std::string, TimeSeries> exogenous)
    : state_(std::move(state)), pollutant_(pollutant), target_(std::move(target)),
      exogenous_(std::move(exogenous)) {
    for (const auto& [name, series] : exogenous_) {
        if (series.start() != target_.start() || series.size() != target_.size()) {
            throw Error(ErrorCode::InvalidInput,
                        "exogenous series '" + name + "' is not aligned with the target");
        }
    }
}

StationSeries StationSeries::slice(std::size_t begin, std::size_t count) const {
    std::map<std::string, TimeSeries> exo;
    for (const auto& [name, series] : exogenous_) {
        exo.emplace(name, series.slice(begin, count));
    }
    return {state_, pollutant_, target_.slice(begin, count), std::move(exo)};
}

ModelTime ModelTime::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > t_.size()) {
        throw Error(ErrorCode::EmptyRange, "model time slice out of range");
    }
    return {{t_.begin() + static_cast<std::ptrdiff_t>(begin),
             t_.begin() + static_cast<std::ptrdiff_t>(begin + count)},
            months_per_unit_};
}

std::vector<MonthStamp> stamp_range(MonthStamp start, std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::EmptyRange, "stamp range needs at least one month");
    }
    std::vector<MonthStamp> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(start.plus_months(static_cast<long>(i)));
    }
    return out;
}

ModelTime model_time(std::size_t series_len, std::size_t train_len) {
    if (train_len == 0 || train_len > series_len) {
        throw Error(ErrorCode::InvalidSplit, "model time needs 1 <= train_len <= series_len");
    }
    std::vector<double> t(series_len, 0.0);
    if (train_len == 1) {
        return {std::move(t), 0.0};
    }
    const double span = static_cast<double>(train_len - 1);
    for (std::size_t i = 0; i < series_len; ++i) {
        t[i] = static_cast<double>(i) / span;
    }
    return {std::move(t), span};
}

} // namespace aqcast
