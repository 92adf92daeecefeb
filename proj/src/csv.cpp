#include "aqcast/bench.hpp"
#include "aqcast/config.hpp"
#include "aqcast/error.hpp"
#include "aqcast/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace aqcast::bench {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = line.find(',');
        out.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) {
            break;
        }
        line.remove_prefix(comma + 1);
    }
    return out;
}

/// Splits into lines, dropping a trailing '\r' and the empty tail after the
/// final newline.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    }
    return lines;
}

std::optional<double> parse_cell(std::string_view cell, std::size_t line_no, std::string_view column) {
    if (cell.empty()) {
        return std::nullopt;
    }
    const std::string s(cell);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad " +
                                          std::string(column) + " value '" + s + "'");
    }
    return v;
}

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

// Shortest text that reads back as the same double.
std::string exact(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string opt_sci(const std::optional<double>& v) {
    return v ? sci(*v) : std::string{};
}

struct RawRow {
    MonthStamp date;
    std::optional<double> value;
    std::array<std::optional<double>, 3> exo;
    std::size_t line_no;
};

} // namespace

Dataset parse_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines.front() != kInputHeader) {
        throw Error(ErrorCode::Parse, "line 1: expected header '" + std::string(kInputHeader) + "'");
    }

    std::map<std::pair<std::string, PollutantKind>, std::vector<RawRow>> groups;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) {
            continue;
        }
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 7) {
            throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 7 fields, got " +
                                              std::to_string(fields.size()));
        }
        if (fields[1].empty()) {
            throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": empty state");
        }
        RawRow row{MonthStamp(1970, 1), {}, {}, line_no};
        try {
            row.date = MonthStamp::parse(fields[0]);
            const auto pollutant = parse_pollutant(fields[2]);
            row.value = parse_cell(fields[3], line_no, "value");
            for (std::size_t c = 0; c < 3; ++c) {
                row.exo[c] = parse_cell(fields[4 + c], line_no, kExogenousColumns[c]);
            }
            groups[{std::string(fields[1]), pollutant}].push_back(row);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Parse) {
                throw;
            }
            const std::string what = e.what();
            throw Error(ErrorCode::Parse, what.starts_with("line ")
                                              ? what
                                              : "line " + std::to_string(line_no) + ": " + what);
        }
    }

    std::vector<StationSeries> records;
    for (auto& [key, rows] : groups) {
        const auto label = key.first + "/" + std::string(to_string(key.second));
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].date == rows[i - 1].date) {
                throw Error(ErrorCode::Duplicate, "line " + std::to_string(rows[i].line_no) +
                                                      ": duplicate " + label + " entry for " +
                                                      rows[i].date.to_string());
            }
            if (rows[i].date != rows[i - 1].date.plus_months(1)) {
                throw Error(ErrorCode::Gap, label + " is missing month " +
                                                rows[i - 1].date.plus_months(1).to_string());
            }
        }
        std::vector<std::optional<double>> target;
        std::array<std::vector<std::optional<double>>, 3> exo;
        for (const auto& r : rows) {
            target.push_back(r.value);
            for (std::size_t c = 0; c < 3; ++c) {
                exo[c].push_back(r.exo[c]);
            }
        }
        const MonthStamp start = rows.front().date;
        std::map<std::string, TimeSeries> exogenous;
        for (std::size_t c = 0; c < 3; ++c) {
            // a channel with no values at all is treated as absent
            if (std::any_of(exo[c].begin(), exo[c].end(), [](const auto& v) { return v.has_value(); })) {
                exogenous.emplace(std::string(kExogenousColumns[c]), TimeSeries(start, std::move(exo[c])));
            }
        }
        records.emplace_back(key.first, key.second, TimeSeries(start, std::move(target)),
                             std::move(exogenous));
    }
    return Dataset(std::move(records));
}

Dataset load_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path));
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ostringstream os;
    os << kInputHeader << '\n';
    for (const auto& s : dataset.records()) {
        const auto& target = s.target();
        for (std::size_t i = 0; i < target.size(); ++i) {
            os << target.stamp(i).to_string() << ',' << s.state() << ',' << to_string(s.pollutant())
               << ',' << (target[i] ? exact(*target[i]) : "");
            for (auto column : kExogenousColumns) {
                os << ',';
                const auto it = s.exogenous().find(std::string(column));
                if (it != s.exogenous().end() && it->second[i]) {
                    os << exact(*it->second[i]);
                }
            }
            os << '\n';
        }
    }
    write_file(path, os.str());
}

std::string format_results_csv(const BenchMatrix& matrix) {
    auto rows = matrix.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        return std::make_tuple(std::string_view(a.state), to_string(a.pollutant), to_string(a.model)) <
               std::make_tuple(std::string_view(b.state), to_string(b.pollutant), to_string(b.model));
    });
    std::ostringstream os;
    os << kResultsHeader << '\n';
    for (const auto& r : rows) {
        os << r.state << ',' << to_string(r.pollutant) << ',' << to_string(r.model) << ',';
        if (r.report) {
            const auto& m = *r.report;
            os << m.n << ',' << sci(m.mse) << ',' << sci(m.rmse) << ',' << opt_sci(m.mape_percent)
               << ',' << m.mape_excluded << ',' << opt_sci(m.r2) << ',';
        } else {
            os << ",,,,,,";
        }
        if (r.wall_time_ms) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", *r.wall_time_ms);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

void write_results_csv(const BenchMatrix& matrix, const std::filesystem::path& path) {
    write_file(path, format_results_csv(matrix));
}

BenchMatrix parse_results_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines.front() != kResultsHeader) {
        throw Error(ErrorCode::Parse, "line 1: expected results header");
    }
    BenchMatrix matrix;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const std::size_t line_no = i + 1;
        const auto f = split_fields(lines[i]);
        if (f.size() != 10) {
            throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 10 fields");
        }
        BenchRow row{std::string(f[0]), parse_pollutant(f[1]), parse_model(f[2]), {}, {}, {}};
        if (!f[3].empty()) {
            metrics::EvalReport m;
            m.n = static_cast<std::size_t>(*parse_cell(f[3], line_no, "n_test"));
            m.mse = parse_cell(f[4], line_no, "mse").value_or(0.0);
            m.rmse = parse_cell(f[5], line_no, "rmse").value_or(0.0);
            m.mape_percent = parse_cell(f[6], line_no, "mape_percent");
            m.mape_excluded = static_cast<std::size_t>(parse_cell(f[7], line_no, "mape_excluded").value_or(0.0));
            m.r2 = parse_cell(f[8], line_no, "r2");
            row.report = m;
        }
        row.wall_time_ms = parse_cell(f[9], line_no, "wall_time_ms");
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

std::string format_forecast_csv(const SeriesOutcome& outcome, bool include_actual) {
    std::ostringstream os;
    os << kForecastHeader << '\n';
    const std::size_t begin = outcome.split_index;
    const std::size_t n = outcome.stamps.size();
    const auto emit = [&](std::string_view name, auto&& value_at) {
        for (std::size_t i = begin; i < n; ++i) {
            os << outcome.stamps[i].to_string() << ',' << name << ',' << value_at(i - begin) << '\n';
        }
    };
    if (include_actual) {
        emit("actual", [&](std::size_t j) {
            const auto& v = outcome.observed[begin + j];
            return v ? exact(*v) : std::string{};
        });
    }
    if (outcome.lstm) {
        emit("lstm", [&](std::size_t j) { return exact((*outcome.lstm)[j]); });
    }
    if (outcome.additive) {
        const auto& a = *outcome.additive;
        emit("additive", [&](std::size_t j) { return exact(*a.yhat[j]); });
        emit("additive_trend", [&](std::size_t j) { return exact(a.trend[j]); });
        emit("additive_seasonal", [&](std::size_t j) { return exact(a.seasonal[j]); });
        if (std::any_of(a.events.begin(), a.events.end(), [](double e) { return e != 0.0; })) {
            emit("additive_events", [&](std::size_t j) { return exact(a.events[j]); });
        }
    }
    return os.str();
}

void write_forecast_csv(const SeriesOutcome& outcome, const std::filesystem::path& path) {
    write_file(path, format_forecast_csv(outcome));
}

std::string format_manifest(const BenchResult& result, const RunConfig& cfg) {
    std::ostringstream os;
    os << "# aqcast benchmark run\n[config]\n" << format_run_config(cfg, false) << "[series]\n";
    for (const auto& o : result.outcomes) {
        const char* status = o.failed() ? "failed" : (o.lstm && o.additive ? "ok" : "partial");
        os << o.state << '/' << to_string(o.pollutant) << " status=" << status
           << " length=" << o.stamps.size() << " split_index=" << o.split_index << '\n';
        if (o.lstm_config) {
            const auto& c = *o.lstm_config;
            os << "  lstm layers=" << c.layers << " cells=" << c.cells << " lr=" << exact(c.learning_rate)
               << " epochs=" << c.epochs << " batch=" << c.batch_size << " dropout=" << exact(c.dropout)
               << " lookback=" << c.lookback << " seed=" << c.seed << '\n';
        }
        for (const auto& g : o.grid_table) {
            os << "  grid layers=" << g.config.layers << " cells=" << g.config.cells
               << " lr=" << exact(g.config.learning_rate) << " epochs=" << g.config.epochs
               << " batch=" << g.config.batch_size << " validation_mse="
               << (g.validation_mse ? sci(*g.validation_mse) : "diverged") << '\n';
        }
        for (const auto& note : o.notes) {
            os << "  note: " << note << '\n';
        }
    }
    return os.str();
}

namespace {

std::string file_stem(const SeriesOutcome& o) {
    return o.state + "_" + std::string(to_string(o.pollutant));
}

} // namespace

void write_outputs(const BenchResult& result, const RunConfig& cfg, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    }
    write_results_csv(result.matrix, dir / "results.csv");
    for (const auto& o : result.outcomes) {
        if (o.split_index == 0 || o.split_index >= o.stamps.size()) {
            continue; // never split; nothing to show
        }
        write_forecast_csv(o, dir / ("forecast_" + file_stem(o) + ".csv"));
        if (cfg.plots) {
            render_plot(make_bundle(o), dir / (file_stem(o) + ".svg"));
        }
    }
    write_file(dir / "run_manifest.txt", format_manifest(result, cfg));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

} // namespace aqcast::bench
