#pragma once

#include "aqcast/additive.hpp"
#include "aqcast/lstm.hpp"
#include "aqcast/metrics.hpp"
#include "aqcast/series.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aqcast::bench {

enum class ModelKind { Additive, Lstm };

std::string_view to_string(ModelKind kind); // "ADDITIVE" / "LSTM"
ModelKind parse_model(std::string_view text);

/// Station series keyed by (state, pollutant), sorted by key.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<StationSeries> records);

    const std::vector<StationSeries>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const StationSeries* find(std::string_view state, PollutantKind pollutant) const;

private:
    std::vector<StationSeries> records_;
};

struct RunConfig {
    double train_fraction = 0.8;
    lstm::LstmGrid lstm_grid;
    additive::AdditiveConfig additive;
    std::uint64_t seed = 0;
    /// Drop meteorological inputs so both models see the same features.
    bool lstm_univariate = false;
    bool plots = false;
    std::size_t jobs = 1;
    /// Wall times vary run to run; they are written only when requested so
    /// default outputs stay byte-stable.
    bool record_timing = false;

    void validate() const;
};

struct BenchRow {
    std::string state;
    PollutantKind pollutant;
    ModelKind model;
    std::optional<metrics::EvalReport> report; // empty when this model failed
    std::optional<double> wall_time_ms;
    std::string error;
};

struct BenchMatrix {
    std::vector<BenchRow> rows;
};

/// Everything produced for one (state, pollutant) pair, in original units.
struct SeriesOutcome {
    std::string state;
    PollutantKind pollutant;
    std::vector<MonthStamp> stamps;        // full series
    std::vector<std::optional<double>> observed; // raw input values
    std::size_t split_index = 0;
    std::optional<std::vector<double>> lstm;     // test window
    std::optional<additive::AdditiveForecast> additive; // test window, original units
    std::optional<lstm::LstmConfig> lstm_config;
    std::vector<lstm::GridEntry> grid_table;
    std::vector<std::string> notes;
    bool failed() const noexcept { return !lstm && !additive; }
};

struct BenchResult {
    BenchMatrix matrix;
    std::vector<SeriesOutcome> outcomes; // same order as the dataset
};

/// Per-series seed: a fixed mix of the run seed and the series key, so a
/// series' result does not depend on which other series are present.
std::uint64_t series_seed(std::uint64_t run_seed, std::string_view state, PollutantKind pollutant);

/// Runs one (state, pollutant) pair: interpolate, split, scale on train, fit
/// both models on scaled train, forecast the test window, invert scaling and
/// score on the observed test points. Model failures are recorded, not thrown.
SeriesOutcome run_series(const StationSeries& series, const RunConfig& cfg,
                         std::vector<BenchRow>& rows);

/// Fits on the whole (interpolated, scaled) series and forecasts the next
/// `horizon` months. The outcome's split_index marks the first future stamp.
SeriesOutcome forecast_future(const StationSeries& series, const RunConfig& cfg,
                              std::size_t horizon, bool with_lstm, bool with_additive);

/// Parallel over series (cfg.jobs workers); output order is by key only.
BenchResult run_benchmark(const Dataset& dataset, const RunConfig& cfg);

// --- files -----------------------------------------------------------------

inline constexpr std::string_view kInputHeader =
    "date,state,pollutant,value,wind_speed,temperature,rainfall";
inline constexpr std::string_view kResultsHeader =
    "state,pollutant,model,n_test,mse,rmse,mape_percent,mape_excluded,r2,wall_time_ms";
inline constexpr std::string_view kForecastHeader = "date,series,value";

/// Exogenous column names, in file order.
inline constexpr std::array<std::string_view, 3> kExogenousColumns{"wind_speed", "temperature",
                                                                   "rainfall"};

Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

std::string format_results_csv(const BenchMatrix& matrix);
void write_results_csv(const BenchMatrix& matrix, const std::filesystem::path& path);
/// Inverse of format_results_csv, at the 6 significant digits written.
BenchMatrix parse_results_csv(std::string_view text);

std::string format_forecast_csv(const SeriesOutcome& outcome, bool include_actual = true);
void write_forecast_csv(const SeriesOutcome& outcome, const std::filesystem::path& path);

std::string format_manifest(const BenchResult& result, const RunConfig& cfg);

/// Writes results.csv, forecast_<state>_<pollutant>.csv, run_manifest.txt and
/// (with cfg.plots) <state>_<pollutant>.svg into `dir`.
void write_outputs(const BenchResult& result, const RunConfig& cfg,
                   const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace aqcast::bench
