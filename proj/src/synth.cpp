#include "aqcast/synth.hpp"

#include "aqcast/error.hpp"
#include "aqcast/preprocess.hpp"
#include "aqcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace aqcast::synth {

std::string_view to_string(RegimeKind kind) {
    switch (kind) {
    case RegimeKind::SeasonalTrend: return "seasonal";
    case RegimeKind::StructuralBreak: return "break";
    case RegimeKind::NearConstant: return "constant";
    }
    return "?";
}

RegimeKind parse_regime(std::string_view text) {
    for (auto k : {RegimeKind::SeasonalTrend, RegimeKind::StructuralBreak, RegimeKind::NearConstant}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw Error(ErrorCode::Parse, "unknown regime '" + std::string(text) + "'");
}

namespace {

std::size_t missing_count(const RegimeSpec& spec) {
    return static_cast<std::size_t>(std::llround(spec.missing_fraction * static_cast<double>(spec.n_months)));
}

} // namespace

void RegimeSpec::validate() const {
    const auto invalid = [](const std::string& what) { return Error(ErrorCode::InvalidSpec, what); };
    if (n_months < 2) {
        throw invalid("n_months must be at least 2");
    }
    if (!(noise_sigma >= 0.0)) {
        throw invalid("noise_sigma must be non-negative");
    }
    if (!(period_months > 0.0)) {
        throw invalid("period_months must be positive");
    }
    if (!(missing_fraction >= 0.0 && missing_fraction < 1.0) || n_months - missing_count(*this) < 2) {
        throw invalid("missing_fraction must leave at least 2 present points");
    }
    if (kind == RegimeKind::StructuralBreak) {
        if (break_month_index >= n_months) {
            throw invalid("break_month_index must be inside the series");
        }
        if (!(break_drop_fraction >= 0.0 && break_drop_fraction <= 1.0)) {
            throw invalid("break_drop_fraction must lie in [0, 1]");
        }
    }
    if (kind == RegimeKind::NearConstant && noise_sigma > 1e-3 * std::abs(base)) {
        throw invalid("near-constant noise_sigma must not exceed 1e-3 * |base|");
    }
}

double regime_mean(const RegimeSpec& spec, std::size_t i) {
    if (spec.kind == RegimeKind::NearConstant) {
        return spec.base;
    }
    const double t = static_cast<double>(i) / static_cast<double>(spec.n_months - 1);
    double y = spec.base + spec.trend_slope * t +
               spec.seasonal_amp *
                   std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / spec.period_months);
    if (spec.kind == RegimeKind::StructuralBreak && i >= spec.break_month_index) {
        const double since = static_cast<double>(i - spec.break_month_index);
        const double remaining = std::max(0.0, 1.0 - since / static_cast<double>(kBreakRecoveryMonths));
        y -= spec.break_drop_fraction * spec.base * remaining;
    }
    return y;
}

StationSeries generate(const RegimeSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n = spec.n_months;
    std::vector<std::optional<double>> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        points[i] = regime_mean(spec, i) + spec.noise_sigma * rng.normal();
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t missing = missing_count(spec);
    for (std::size_t j = 0; j < missing; ++j) {
        points[idx[j]].reset();
    }
    return {spec.state, spec.pollutant, TimeSeries(spec.start, std::move(points))};
}

std::vector<StationSeries> generate_suite(std::span<const std::uint64_t> seeds,
                                          const RegimeSpec& spec_template) {
    std::vector<StationSeries> out;
    out.reserve(seeds.size());
    for (auto seed : seeds) {
        RegimeSpec spec = spec_template;
        spec.seed = seed;
        char label[32];
        std::snprintf(label, sizeof label, "_%03llu", static_cast<unsigned long long>(seed));
        spec.state = spec_template.state + label;
        out.push_back(generate(spec));
    }
    return out;
}

std::size_t test_adjacent_break_index(std::size_t n_months) {
    return preprocess::split_index(n_months, 0.8) - 1;
}

RegimeSpec default_spec(RegimeKind kind) {
    RegimeSpec spec;
    spec.kind = kind;
    switch (kind) {
    case RegimeKind::SeasonalTrend:
        spec.pollutant = PollutantKind::CO;
        break;
    case RegimeKind::StructuralBreak:
        spec.pollutant = PollutantKind::SO4;
        spec.break_month_index = test_adjacent_break_index(spec.n_months);
        break;
    case RegimeKind::NearConstant:
        spec.pollutant = PollutantKind::SO2;
        spec.base = 6e-11;
        spec.trend_slope = 0.0;
        spec.seasonal_amp = 0.0;
        spec.noise_sigma = 0.0;
        break;
    }
    return spec;
}

} // namespace aqcast::synth
