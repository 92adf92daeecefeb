#include "aqcast/bench.hpp"
#include "aqcast/error.hpp"
#include "aqcast/synth.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace aqcast;
using namespace aqcast::bench;

namespace {

RunConfig fast() {
    RunConfig cfg;
    cfg.lstm_grid.layers = {1};
    cfg.lstm_grid.cells = {4};
    cfg.lstm_grid.learning_rates = {1e-2};
    cfg.lstm_grid.epochs = {5};
    cfg.seed = 7;
    return cfg;
}

StationSeries seasonal(std::uint64_t seed, std::string state = "SYNTH", double scale = 1.0) {
    auto spec = synth::default_spec(synth::RegimeKind::SeasonalTrend);
    spec.seed = seed;
    spec.state = std::move(state);
    const auto s = synth::generate(spec);
    std::vector<std::optional<double>> v = s.target().points();
    for (auto& x : v) {
        *x *= scale;
    }
    return {s.state(), s.pollutant(), TimeSeries(s.target().start(), v)};
}

StationSeries with_meteo(const StationSeries& s, std::uint64_t seed) {
    Rng rng(seed);
    std::map<std::string, TimeSeries> exo;
    for (const char* name : {"rainfall", "temperature", "wind_speed"}) {
        exo.emplace(name, TimeSeries::from_values(s.target().start(),
                                                  testing::random_values(rng, s.target().size(), 0, 40)));
    }
    return {s.state(), s.pollutant(), s.target(), exo};
}

} // namespace

TEST_CASE("model names") {
    CHECK(parse_model("LSTM") == ModelKind::Lstm);
    CHECK(parse_model(to_string(ModelKind::Additive)) == ModelKind::Additive);
    CHECK_THROWS_AS((void)parse_model("PROPHET"), Error);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.train_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.lstm_grid.cells.clear();
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.jobs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("one series gives one row per model") {
    const auto r = run_benchmark(Dataset({seasonal(0)}), fast());
    REQUIRE(r.matrix.rows.size() == 2);
    CHECK(r.matrix.rows[0].model == ModelKind::Additive);
    CHECK(r.matrix.rows[1].model == ModelKind::Lstm);
    for (const auto& row : r.matrix.rows) {
        REQUIRE(row.report);
        CHECK(row.report->n == 14);
        CHECK(row.error.empty());
        CHECK_FALSE(row.wall_time_ms);
    }
    REQUIRE(r.outcomes.size() == 1);
    const auto& o = r.outcomes[0];
    CHECK(o.split_index == 58);
    CHECK(o.lstm->size() == 14);
    CHECK(o.additive->yhat.size() == 14);
    CHECK(o.additive->yhat.start() == o.stamps[58]);
    CHECK(o.grid_table.empty());
    for (std::size_t i = 0; i < 14; ++i) {
        CHECK(*o.additive->yhat[i] ==
              doctest::Approx(o.additive->trend[i] + o.additive->seasonal[i] + o.additive->events[i])
                  .epsilon(1e-12));
    }
}

TEST_CASE("scores are in original units and on the observed test points only") {
    auto s = seasonal(1);
    auto points = s.target().points();
    points[60].reset();
    points[70].reset();
    const StationSeries holey(s.state(), s.pollutant(), TimeSeries(s.target().start(), points));
    const auto r = run_benchmark(Dataset({holey}), fast());
    const auto& o = r.outcomes[0];
    std::vector<double> actual;
    std::vector<double> lstm;
    std::vector<double> add;
    for (std::size_t i = 58; i < 72; ++i) {
        if (points[i]) {
            actual.push_back(*points[i]);
            lstm.push_back((*o.lstm)[i - 58]);
            add.push_back(*o.additive->yhat[i - 58]);
        }
    }
    CHECK(r.matrix.rows[0].report == metrics::evaluate(actual, add));
    CHECK(r.matrix.rows[1].report == metrics::evaluate(actual, lstm));
    CHECK(r.matrix.rows[0].report->n == 12);
    CHECK(r.matrix.rows[1].report->n == 12);
}

TEST_CASE("scaling the input scales the additive error") {
    const auto a = run_benchmark(Dataset({seasonal(2)}), fast());
    const auto b = run_benchmark(Dataset({seasonal(2, "SYNTH", 1e-8)}), fast());
    CHECK(b.matrix.rows[0].report->rmse == doctest::Approx(1e-8 * a.matrix.rows[0].report->rmse).epsilon(1e-6));
    CHECK(b.matrix.rows[1].report->rmse < 1e-7);
}

TEST_CASE("results do not depend on scheduling or on neighbouring series") {
    std::vector<StationSeries> all;
    for (std::uint64_t i = 0; i < 5; ++i) {
        all.push_back(with_meteo(seasonal(i, "S" + std::to_string(i)), i));
    }
    auto cfg = fast();
    const auto serial = run_benchmark(Dataset(all), cfg);
    cfg.jobs = 3;
    const auto parallel = run_benchmark(Dataset(all), cfg);
    CHECK(format_results_csv(serial.matrix) == format_results_csv(parallel.matrix));
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(format_forecast_csv(serial.outcomes[i]) == format_forecast_csv(parallel.outcomes[i]));
    }

    const auto alone = run_benchmark(Dataset({all[3]}), fast());
    CHECK(alone.matrix.rows[1].report == serial.matrix.rows[7].report);
    CHECK(series_seed(7, "S3", PollutantKind::CO) != series_seed(7, "S4", PollutantKind::CO));
    CHECK(series_seed(7, "S3", PollutantKind::CO) != series_seed(8, "S3", PollutantKind::CO));
}

TEST_CASE("a failing series is isolated") {
    const StationSeries tiny("TINY", PollutantKind::CO, TimeSeries::from_values({2020, 1}, std::vector<double>{1.0}));
    auto points = seasonal(3).target().points();
    for (std::size_t i = 58; i < 72; ++i) {
        points[i].reset();
    }
    const StationSeries blind("BLIND", PollutantKind::CO, TimeSeries({2018, 1}, points));
    const auto r = run_benchmark(Dataset({seasonal(4, "OK"), tiny, blind}), fast());
    REQUIRE(r.matrix.rows.size() == 6);
    for (const auto& row : r.matrix.rows) {
        if (row.state == "OK") {
            CHECK(row.report);
        } else {
            CHECK_FALSE(row.report);
            CHECK_FALSE(row.error.empty());
        }
    }
    CHECK(r.outcomes[0].state == "BLIND");
    CHECK(r.outcomes[0].failed());
    CHECK(r.outcomes[0].notes.front().starts_with("insufficient-data"));
    CHECK(r.outcomes[2].failed());

    const auto csv = format_results_csv(r.matrix);
    CHECK(csv.find("TINY,CO,LSTM,,,,,,,\n") != std::string::npos);
}

TEST_CASE("a model that cannot train fails alone") {
    auto cfg = fast();
    cfg.lstm_grid.lookback = 60; // longer than the training window
    const auto r = run_benchmark(Dataset({seasonal(5)}), cfg);
    CHECK(r.matrix.rows[0].report);
    CHECK_FALSE(r.matrix.rows[1].report);
    CHECK(r.matrix.rows[1].error.starts_with("insufficient-data"));
    CHECK_FALSE(r.outcomes[0].failed());
    CHECK(format_manifest(r, cfg).find("status=partial") != std::string::npos);
}

TEST_CASE("grid search runs for a lattice and is recorded") {
    auto cfg = fast();
    cfg.lstm_grid.learning_rates = {1e-2, 1e-3};
    const auto r = run_benchmark(Dataset({seasonal(6)}), cfg);
    const auto& o = r.outcomes[0];
    CHECK(o.grid_table.size() == 2);
    REQUIRE(o.lstm_config);
    CHECK(o.lstm_config->seed == series_seed(7, "SYNTH", PollutantKind::CO));
    const auto manifest = format_manifest(r, cfg);
    CHECK(manifest.find("  grid layers=1 cells=4 lr=0.01") != std::string::npos);
    CHECK(manifest.find("status=ok") != std::string::npos);
}

TEST_CASE("univariate mode ignores meteorology") {
    auto cfg = fast();
    const auto s = with_meteo(seasonal(7), 7);
    cfg.lstm_univariate = true;
    const auto uni = run_benchmark(Dataset({s}), cfg);
    const auto bare = run_benchmark(Dataset({seasonal(7)}), cfg);
    CHECK(uni.matrix.rows[1].report == bare.matrix.rows[1].report);
    cfg.lstm_univariate = false;
    const auto multi = run_benchmark(Dataset({s}), cfg);
    CHECK_FALSE(multi.matrix.rows[1].report == bare.matrix.rows[1].report);
    // the additive model never sees meteorology
    CHECK(multi.matrix.rows[0].report == bare.matrix.rows[0].report);
}

TEST_CASE("timing is recorded only on request") {
    auto cfg = fast();
    cfg.record_timing = true;
    const auto r = run_benchmark(Dataset({seasonal(8)}), cfg);
    for (const auto& row : r.matrix.rows) {
        REQUIRE(row.wall_time_ms);
        CHECK(*row.wall_time_ms >= 0.0);
    }
}

TEST_CASE("forecasting past the end of the data") {
    const auto s = seasonal(9);
    const auto o = forecast_future(s, fast(), 12, true, true);
    CHECK(o.split_index == 72);
    CHECK(o.stamps.size() == 84);
    CHECK(o.stamps[72] == MonthStamp(2024, 1));
    CHECK(o.lstm->size() == 12);
    CHECK(o.additive->yhat.size() == 12);
    CHECK(o.additive->yhat.start() == MonthStamp(2024, 1));
    const auto csv = format_forecast_csv(o, false);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 12 * 4);

    const auto only = forecast_future(s, fast(), 3, false, true);
    CHECK_FALSE(only.lstm);
    CHECK(only.additive);
}

TEST_CASE("output files") {
    auto cfg = fast();
    cfg.plots = true;
    const auto r = run_benchmark(Dataset({seasonal(10, "A"), seasonal(11, "B")}), cfg);
    const auto dir = testing::scratch_dir("bench_outputs");
    write_outputs(r, cfg, dir / "out");
    for (const char* name : {"results.csv", "run_manifest.txt", "forecast_A_CO.csv", "forecast_B_CO.csv",
                             "A_CO.svg", "B_CO.svg"}) {
        CAPTURE(name);
        CHECK(std::filesystem::exists(dir / "out" / name));
    }
    const auto parsed = parse_results_csv(read_file(dir / "out" / "results.csv"));
    CHECK(parsed.rows.size() == 4);
    const auto manifest = read_file(dir / "out" / "run_manifest.txt");
    CHECK(manifest.find("seed = 7") != std::string::npos);
    CHECK(manifest.find("A/CO status=ok") != std::string::npos);
}
