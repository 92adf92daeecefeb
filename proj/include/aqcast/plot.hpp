#pragma once

#include "aqcast/series.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aqcast::bench {

struct SeriesOutcome;

/// Observed series plus model forecasts over the trailing test window.
struct ForecastBundle {
    std::string title;
    std::vector<MonthStamp> stamps;
    std::vector<std::optional<double>> actual; // aligned with stamps
    std::size_t test_begin = 0;                // first test stamp index
    /// (label, values aligned with stamps[test_begin..])
    std::vector<std::pair<std::string, std::vector<double>>> forecasts;
};

/// Fixed canvas geometry, in SVG user units. The x position of stamp i out
/// of n is kMarginLeft + i * plot_width / (n - 1); a single stamp sits in the
/// middle of the plot area.
struct PlotGeometry {
    static constexpr double kWidth = 800.0;
    static constexpr double kHeight = 420.0;
    static constexpr double kMarginLeft = 70.0;
    static constexpr double kMarginRight = 150.0;
    static constexpr double kMarginTop = 40.0;
    static constexpr double kMarginBottom = 50.0;
};

ForecastBundle make_bundle(const SeriesOutcome& outcome);

/// Deterministic SVG line chart; the test window is a <rect id="test-window">.
std::string render_svg(const ForecastBundle& bundle);
void render_plot(const ForecastBundle& bundle, const std::filesystem::path& path);

} // namespace aqcast::bench
