#include "aqcast/bench.hpp"

#include "aqcast/error.hpp"
#include "aqcast/preprocess.hpp"
#include "aqcast/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace aqcast::bench {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::Additive ? "ADDITIVE" : "LSTM";
}

ModelKind parse_model(std::string_view text) {
    if (text == "ADDITIVE") {
        return ModelKind::Additive;
    }
    if (text == "LSTM") {
        return ModelKind::Lstm;
    }
    throw Error(ErrorCode::Parse, "unknown model '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<StationSeries> records) : records_(std::move(records)) {
    const auto key = [](const StationSeries& s) {
        return std::make_pair(std::string_view(s.state()), to_string(s.pollutant()));
    };
    std::stable_sort(records_.begin(), records_.end(),
                     [&](const auto& a, const auto& b) { return key(a) < key(b); });
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (key(records_[i]) == key(records_[i - 1])) {
            throw Error(ErrorCode::Duplicate, "dataset holds " + records_[i].state() + "/" +
                                                  std::string(to_string(records_[i].pollutant())) +
                                                  " twice");
        }
    }
}

const StationSeries* Dataset::find(std::string_view state, PollutantKind pollutant) const {
    for (const auto& s : records_) {
        if (s.state() == state && s.pollutant() == pollutant) {
            return &s;
        }
    }
    return nullptr;
}

void RunConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "train_fraction must lie in (0, 1)");
    }
    if (jobs < 1) {
        throw Error(ErrorCode::InvalidSpec, "jobs must be at least 1");
    }
    if (lstm_grid.expand(0).empty()) {
        throw Error(ErrorCode::InvalidSpec, "LSTM lattice is empty");
    }
    for (const auto& c : lstm_grid.expand(0)) {
        c.validate();
    }
    additive.validate();
}

std::uint64_t series_seed(std::uint64_t run_seed, std::string_view state, PollutantKind pollutant) {
    std::string key(state);
    key += '/';
    key += to_string(pollutant);
    return derive_seed(run_seed, stable_hash(key));
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Scaled training view of a series plus what is needed to map back.
struct Prepared {
    StationSeries scaled_train;
    preprocess::ScalerParams scaler;
    std::vector<std::size_t> observed_test; // offsets into the test window
    std::vector<double> test_actual;        // raw observations at those offsets
};

Prepared prepare(const StationSeries& series, std::size_t k, std::vector<std::string>& notes) {
    const std::size_t n = series.target().size();
    const auto filled = preprocess::interpolate_linear(series.target());
    const auto scaler = preprocess::fit_minmax(filled.slice(0, k));
    const auto scaled = preprocess::apply_minmax(filled.slice(0, k), scaler);

    std::map<std::string, TimeSeries> exo;
    for (const auto& [name, channel] : series.exogenous()) {
        if (channel.present_count() == 0) {
            notes.push_back("exogenous channel '" + name + "' has no values; dropped");
            continue;
        }
        const auto train_part = preprocess::interpolate_linear(channel).slice(0, k);
        exo.emplace(name, preprocess::apply_minmax(train_part, preprocess::fit_minmax(train_part)));
    }

    Prepared p{StationSeries(series.state(), series.pollutant(), scaled, std::move(exo)), scaler, {}, {}};
    for (std::size_t i = k; i < n; ++i) {
        if (const auto& v = series.target()[i]) {
            p.observed_test.push_back(i - k);
            p.test_actual.push_back(*v);
        }
    }
    if (p.observed_test.empty()) {
        throw Error(ErrorCode::InsufficientData, "test window has no observed values");
    }
    return p;
}

metrics::EvalReport score(const Prepared& p, const std::vector<double>& forecast) {
    std::vector<double> predicted;
    predicted.reserve(p.observed_test.size());
    for (auto j : p.observed_test) {
        predicted.push_back(forecast[j]);
    }
    return metrics::evaluate(p.test_actual, predicted);
}

void require_finite(const std::vector<double>& values, std::string_view what) {
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::Numeric, std::string(what) + " forecast is not finite");
    }
}

additive::AdditiveForecast to_original_units(const additive::AdditiveForecast& f,
                                             const preprocess::ScalerParams& s) {
    const double range = s.degenerate ? 0.0 : s.max - s.min;
    const auto rescale = [&](std::vector<double> v) {
        for (auto& x : v) {
            x *= range;
        }
        return v;
    };
    auto yhat = preprocess::invert_minmax(f.yhat.values(), s);
    return {TimeSeries::from_values(f.yhat.start(), yhat), preprocess::invert_minmax(f.trend, s),
            rescale(f.seasonal), rescale(f.events)};
}

} // namespace

SeriesOutcome run_series(const StationSeries& series, const RunConfig& cfg,
                         std::vector<BenchRow>& rows) {
    SeriesOutcome out;
    out.state = series.state();
    out.pollutant = series.pollutant();
    out.stamps = series.target().stamps();
    out.observed = series.target().points();

    BenchRow additive_row{out.state, out.pollutant, ModelKind::Additive, {}, {}, {}};
    BenchRow lstm_row{out.state, out.pollutant, ModelKind::Lstm, {}, {}, {}};
    const auto finish = [&] {
        rows.push_back(std::move(additive_row));
        rows.push_back(std::move(lstm_row));
    };

    std::optional<Prepared> prepared;
    try {
        const std::size_t n = series.target().size();
        out.split_index = preprocess::split_index(n, cfg.train_fraction);
        prepared = prepare(series, out.split_index, out.notes);
    } catch (const Error& e) {
        const std::string note = std::string(to_string(e.code())) + ": " + e.what();
        out.notes.push_back(note);
        additive_row.error = lstm_row.error = note;
        finish();
        return out;
    }
    const Prepared& p = *prepared;
    const std::size_t k = out.split_index;
    const std::size_t horizon = out.stamps.size() - k;

    auto start = Clock::now();
    try {
        const auto fit = additive::fit(p.scaled_train.target(), cfg.additive);
        for (const auto& d : fit.diagnostics) {
            out.notes.push_back("additive: " + d);
        }
        const auto forecast =
            to_original_units(additive::predict(fit, additive::horizon_time(k, horizon)), p.scaler);
        const auto yhat = forecast.yhat.values();
        require_finite(yhat, "additive");
        additive_row.report = score(p, yhat);
        out.additive = forecast;
    } catch (const Error& e) {
        additive_row.error = std::string(to_string(e.code())) + ": " + e.what();
        out.notes.push_back("additive failed: " + additive_row.error);
    }
    if (cfg.record_timing) {
        additive_row.wall_time_ms = elapsed_ms(start);
    }

    start = Clock::now();
    try {
        const auto seed = series_seed(cfg.seed, out.state, out.pollutant);
        const auto lattice = cfg.lstm_grid.expand(seed);
        lstm::LstmConfig chosen = lattice.front();
        if (lattice.size() > 1) {
            auto search = lstm::grid_search(p.scaled_train, lattice, seed, cfg.lstm_univariate);
            chosen = search.best;
            out.grid_table = std::move(search.table);
        }
        out.lstm_config = chosen;
        auto fit = lstm::train(p.scaled_train, chosen, cfg.lstm_univariate);
        fit.scaler = p.scaler;
        const auto ctx = lstm::context_block(p.scaled_train, chosen.lookback, cfg.lstm_univariate);
        const auto forecast =
            preprocess::invert_minmax(lstm::predict_recursive(fit, ctx, horizon), p.scaler);
        require_finite(forecast, "lstm");
        lstm_row.report = score(p, forecast);
        out.lstm = forecast;
    } catch (const Error& e) {
        lstm_row.error = std::string(to_string(e.code())) + ": " + e.what();
        out.notes.push_back("lstm failed: " + lstm_row.error);
    }
    if (cfg.record_timing) {
        lstm_row.wall_time_ms = elapsed_ms(start);
    }
    finish();
    return out;
}

SeriesOutcome forecast_future(const StationSeries& series, const RunConfig& cfg,
                              std::size_t horizon, bool with_lstm, bool with_additive) {
    cfg.validate();
    const std::size_t n = series.target().size();
    SeriesOutcome out;
    out.state = series.state();
    out.pollutant = series.pollutant();
    out.stamps = stamp_range(series.target().start(), n + horizon);
    out.observed = series.target().points();
    out.observed.resize(n + horizon);
    out.split_index = n;
    if (horizon == 0) {
        return out;
    }

    const auto filled = preprocess::interpolate_linear(series.target());
    const auto scaler = preprocess::fit_minmax(filled);
    std::map<std::string, TimeSeries> exo;
    for (const auto& [name, channel] : series.exogenous()) {
        if (channel.present_count() == 0) {
            continue;
        }
        const auto c = preprocess::interpolate_linear(channel);
        exo.emplace(name, preprocess::apply_minmax(c, preprocess::fit_minmax(c)));
    }
    const StationSeries scaled(series.state(), series.pollutant(),
                               preprocess::apply_minmax(filled, scaler), std::move(exo));

    if (with_additive) {
        const auto fit = additive::fit(scaled.target(), cfg.additive);
        out.notes.insert(out.notes.end(), fit.diagnostics.begin(), fit.diagnostics.end());
        out.additive = to_original_units(additive::predict(fit, additive::horizon_time(n, horizon)), scaler);
    }
    if (with_lstm) {
        const auto seed = series_seed(cfg.seed, out.state, out.pollutant);
        const auto lattice = cfg.lstm_grid.expand(seed);
        lstm::LstmConfig chosen = lattice.front();
        if (lattice.size() > 1) {
            auto search = lstm::grid_search(scaled, lattice, seed, cfg.lstm_univariate);
            chosen = search.best;
            out.grid_table = std::move(search.table);
        }
        out.lstm_config = chosen;
        auto fit = lstm::train(scaled, chosen, cfg.lstm_univariate);
        fit.scaler = scaler;
        const auto ctx = lstm::context_block(scaled, chosen.lookback, cfg.lstm_univariate);
        out.lstm = preprocess::invert_minmax(lstm::predict_recursive(fit, ctx, horizon), scaler);
        require_finite(*out.lstm, "lstm");
    }
    return out;
}

BenchResult run_benchmark(const Dataset& dataset, const RunConfig& cfg) {
    cfg.validate();
    const auto& records = dataset.records();
    const std::size_t n = records.size();
    std::vector<SeriesOutcome> outcomes(n);
    std::vector<std::vector<BenchRow>> rows(n);

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                outcomes[i] = run_series(records[i], cfg, rows[i]);
            } catch (const std::exception& e) {
                // Anything unexpected still yields annotated rows for this series.
                rows[i].clear();
                for (auto model : {ModelKind::Additive, ModelKind::Lstm}) {
                    rows[i].push_back({records[i].state(), records[i].pollutant(), model, {}, {}, e.what()});
                }
                outcomes[i].state = records[i].state();
                outcomes[i].pollutant = records[i].pollutant();
                outcomes[i].notes.push_back(std::string("internal error: ") + e.what());
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    BenchResult result;
    result.outcomes = std::move(outcomes);
    for (auto& r : rows) {
        for (auto& row : r) {
            result.matrix.rows.push_back(std::move(row));
        }
    }
    return result;
}

} // namespace aqcast::bench
