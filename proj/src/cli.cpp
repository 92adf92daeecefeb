#include "aqcast/cli.hpp"

#include "aqcast/bench.hpp"
#include "aqcast/config.hpp"
#include "aqcast/error.hpp"
#include "aqcast/metrics.hpp"
#include "aqcast/preprocess.hpp"
#include "aqcast/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <numeric>

namespace aqcast::cli {

namespace {

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
    const auto fail = [&] {
        return Error(ErrorCode::Parse, "expected seeds as a..b or a single integer, got '" + text + "'");
    };
    const auto to_u64 = [&](const std::string& s) {
        char* end = nullptr;
        if (s.empty() || s.front() == '-') {
            throw fail();
        }
        const auto v = std::strtoull(s.c_str(), &end, 10);
        if (end != s.c_str() + s.size()) {
            throw fail();
        }
        return static_cast<std::uint64_t>(v);
    };
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        return {to_u64(text)};
    }
    const auto lo = to_u64(text.substr(0, dots));
    const auto hi = to_u64(text.substr(dots + 2));
    if (hi < lo) {
        throw fail();
    }
    std::vector<std::uint64_t> seeds(hi - lo + 1);
    std::iota(seeds.begin(), seeds.end(), lo);
    return seeds;
}

std::vector<double> read_value_column(const std::filesystem::path& path) {
    const std::string text = bench::read_file(path);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            nl = text.size();
        }
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
        pos = nl + 1;
    }
    const auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            out.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) {
                return out;
            }
            start = comma + 1;
        }
    };
    const auto number = [](const std::string& s, double& v) {
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        return !s.empty() && end == s.c_str() + s.size();
    };

    std::size_t column = 0;
    std::size_t first = 0;
    if (!lines.empty()) {
        const auto header = split(lines.front());
        double probe = 0.0;
        if (!(header.size() == 1 && number(header.front(), probe))) {
            const auto it = std::find(header.begin(), header.end(), "value");
            if (it == header.end() && header.size() != 1) {
                throw Error(ErrorCode::Parse, path.string() + ": no 'value' column");
            }
            column = it == header.end() ? 0 : static_cast<std::size_t>(it - header.begin());
            first = 1;
        }
    }
    std::vector<double> values;
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const auto fields = split(lines[i]);
        double v = 0.0;
        if (column >= fields.size() || !number(fields[column], v)) {
            throw Error(ErrorCode::Parse,
                        path.string() + ": line " + std::to_string(i + 1) + ": expected a number");
        }
        values.push_back(v);
    }
    return values;
}

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

void print_report(const metrics::EvalReport& r, std::ostream& out) {
    out << "n = " << r.n << '\n'
        << "mse = " << sci(r.mse) << '\n'
        << "rmse = " << sci(r.rmse) << '\n'
        << "mape_percent = " << (r.mape_percent ? sci(*r.mape_percent) : "undefined") << '\n'
        << "mape_excluded = " << r.mape_excluded << '\n'
        << "r2 = " << (r.r2 ? sci(*r.r2) : "undefined") << '\n';
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Air-quality forecasting benchmark: additive trend/seasonality model vs LSTM"};
    app.require_subcommand(1, 1);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run both models over every series in a dataset");
    std::string bench_input;
    std::string bench_config;
    std::string bench_out;
    std::optional<std::uint64_t> bench_seed;
    std::optional<std::size_t> bench_jobs;
    bool bench_univariate = false;
    bool bench_plots = false;
    bool bench_timing = false;
    bench_cmd->add_option("--input", bench_input, "Input CSV")->required();
    bench_cmd->add_option("--config", bench_config, "key=value run configuration");
    bench_cmd->add_option("--out-dir", bench_out, "Output directory")->required();
    bench_cmd->add_option("--seed", bench_seed, "Run seed");
    bench_cmd->add_option("--jobs", bench_jobs, "Parallel workers")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--lstm-univariate", bench_univariate, "Feed the LSTM the target only");
    bench_cmd->add_flag("--plots", bench_plots, "Write an SVG per series");
    bench_cmd->add_flag("--record-timing", bench_timing, "Fill wall_time_ms (output no longer reproducible)");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write seeded synthetic series as input CSV");
    std::string regime;
    std::string seeds_text;
    std::string synth_out;
    std::optional<std::size_t> n_months;
    std::optional<std::size_t> break_index;
    std::optional<double> drop;
    std::optional<double> noise;
    std::optional<double> missing;
    std::optional<std::string> start;
    synth_cmd->add_option("--regime", regime, "seasonal | break | constant")
        ->required()
        ->check(CLI::IsMember({"seasonal", "break", "constant"}));
    synth_cmd->add_option("--seeds", seeds_text, "Seed range a..b (inclusive)")->required();
    synth_cmd->add_option("--out", synth_out, "Output CSV")->required();
    synth_cmd->add_option("--n-months", n_months, "Series length");
    synth_cmd->add_option("--break-index", break_index, "Break month index (break regime)");
    synth_cmd->add_option("--drop", drop, "Break drop fraction");
    synth_cmd->add_option("--noise", noise, "Noise sigma");
    synth_cmd->add_option("--missing-fraction", missing, "Fraction of points flagged missing");
    synth_cmd->add_option("--start", start, "First month, YYYY-MM");

    // forecast
    auto* fc_cmd = app.add_subcommand("forecast", "Fit on a full series and forecast ahead");
    std::string fc_input;
    std::string fc_state;
    std::string fc_pollutant;
    std::string fc_model = "both";
    std::size_t fc_horizon = 12;
    std::string fc_out;
    std::string fc_config;
    std::optional<std::uint64_t> fc_seed;
    bool fc_univariate = false;
    fc_cmd->add_option("--input", fc_input, "Input CSV")->required();
    fc_cmd->add_option("--state", fc_state, "State label")->required();
    fc_cmd->add_option("--pollutant", fc_pollutant, "Pollutant")->required();
    fc_cmd->add_option("--model", fc_model, "lstm | additive | both")
        ->check(CLI::IsMember({"lstm", "additive", "both"}));
    fc_cmd->add_option("--horizon", fc_horizon, "Months to forecast");
    fc_cmd->add_option("--out", fc_out, "Output CSV")->required();
    fc_cmd->add_option("--config", fc_config, "key=value run configuration");
    fc_cmd->add_option("--seed", fc_seed, "Run seed");
    fc_cmd->add_flag("--lstm-univariate", fc_univariate, "Feed the LSTM the target only");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score predicted values against actual values");
    std::string eval_actual;
    std::string eval_predicted;
    eval_cmd->add_option("--actual", eval_actual, "CSV with a value column")->required();
    eval_cmd->add_option("--predicted", eval_predicted, "CSV with a value column")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    // malformed seed ranges are usage errors, caught before any work starts
    std::vector<std::uint64_t> seeds;
    if (*synth_cmd) {
        try {
            seeds = parse_seed_range(seeds_text);
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n\n" << synth_cmd->help();
            return kExitUsage;
        }
    }

    try {
        if (*bench_cmd) {
            auto cfg = bench_config.empty() ? bench::RunConfig{} : bench::load_run_config(bench_config);
            if (bench_seed) {
                cfg.seed = *bench_seed;
            }
            if (bench_jobs) {
                cfg.jobs = *bench_jobs;
            }
            cfg.lstm_univariate = cfg.lstm_univariate || bench_univariate;
            cfg.plots = cfg.plots || bench_plots;
            cfg.record_timing = bench_timing;
            const auto dataset = bench::load_csv(bench_input);
            const auto result = bench::run_benchmark(dataset, cfg);
            bench::write_outputs(result, cfg, bench_out);
            std::size_t failed_rows = 0;
            for (const auto& row : result.matrix.rows) {
                if (!row.report) {
                    ++failed_rows;
                    err << "warning: " << row.state << '/' << to_string(row.pollutant) << ' '
                        << bench::to_string(row.model) << ": " << row.error << '\n';
                }
            }
            out << "wrote " << result.matrix.rows.size() << " rows (" << failed_rows << " failed) to "
                << (std::filesystem::path(bench_out) / "results.csv").string() << '\n';
        } else if (*synth_cmd) {
            auto spec = synth::default_spec(synth::parse_regime(regime));
            if (n_months) {
                spec.n_months = *n_months;
                if (spec.kind == synth::RegimeKind::StructuralBreak && !break_index) {
                    spec.break_month_index = synth::test_adjacent_break_index(spec.n_months);
                }
            }
            if (break_index) {
                spec.break_month_index = *break_index;
            }
            if (drop) {
                spec.break_drop_fraction = *drop;
            }
            if (noise) {
                spec.noise_sigma = *noise;
            }
            if (missing) {
                spec.missing_fraction = *missing;
            }
            if (start) {
                spec.start = MonthStamp::parse(*start);
            }
            const bench::Dataset dataset(synth::generate_suite(seeds, spec));
            bench::write_dataset_csv(dataset, synth_out);
            out << "wrote " << dataset.size() << " series to " << synth_out << '\n';
        } else if (*fc_cmd) {
            auto cfg = fc_config.empty() ? bench::RunConfig{} : bench::load_run_config(fc_config);
            if (fc_seed) {
                cfg.seed = *fc_seed;
            }
            cfg.lstm_univariate = cfg.lstm_univariate || fc_univariate;
            const auto dataset = bench::load_csv(fc_input);
            const auto* series = dataset.find(fc_state, parse_pollutant(fc_pollutant));
            if (series == nullptr) {
                throw Error(ErrorCode::InvalidInput,
                            "no series for " + fc_state + "/" + fc_pollutant + " in " + fc_input);
            }
            const auto outcome = bench::forecast_future(*series, cfg, fc_horizon, fc_model != "additive",
                                                        fc_model != "lstm");
            bench::write_file(fc_out, bench::format_forecast_csv(outcome, false));
            out << "wrote " << fc_horizon << "-month forecast to " << fc_out << '\n';
        } else if (*eval_cmd) {
            const auto actual = read_value_column(eval_actual);
            const auto predicted = read_value_column(eval_predicted);
            print_report(metrics::evaluate(actual, predicted), out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace aqcast::cli
