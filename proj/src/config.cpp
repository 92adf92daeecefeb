#include "aqcast/config.hpp"

#include "aqcast/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace aqcast::bench {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        s.remove_prefix(comma + 1);
    }
    return out;
}

class LineParser {
public:
    LineParser(std::size_t line, std::string_view key) : line_(line), key_(key) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorCode::Parse, "config line " + std::to_string(line_) + " (" +
                                          std::string(key_) + "): " + why);
    }

    double real(std::string_view text) const {
        const std::string s(text);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) {
            fail("expected a number, got '" + s + "'");
        }
        return v;
    }

    std::uint64_t count(std::string_view text) const {
        const std::string s(text);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (s.empty() || s.front() == '-' || end != s.c_str() + s.size()) {
            fail("expected a non-negative integer, got '" + s + "'");
        }
        return v;
    }

    bool flag(std::string_view text) const {
        if (text == "true" || text == "1") {
            return true;
        }
        if (text == "false" || text == "0") {
            return false;
        }
        fail("expected true or false");
    }

    std::vector<std::size_t> counts(std::string_view text) const {
        std::vector<std::size_t> out;
        for (auto item : split_list(text)) {
            out.push_back(static_cast<std::size_t>(count(item)));
        }
        return out;
    }

    std::vector<double> reals(std::string_view text) const {
        std::vector<double> out;
        for (auto item : split_list(text)) {
            out.push_back(real(item));
        }
        return out;
    }

private:
    std::size_t line_;
    std::string_view key_;
};

// Shortest text that parses back to the same value.
template <typename T>
std::string number(T v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? "," : "") + number(items[i]);
    }
    return out;
}

} // namespace

RunConfig parse_run_config(std::string_view text, RunConfig cfg) {
    bool events_reset = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::Parse,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const LineParser p(line_no, key);

        if (key == "train_fraction") {
            cfg.train_fraction = p.real(value);
        } else if (key == "seed") {
            cfg.seed = p.count(value);
        } else if (key == "jobs") {
            cfg.jobs = static_cast<std::size_t>(p.count(value));
        } else if (key == "plots") {
            cfg.plots = p.flag(value);
        } else if (key == "lstm_univariate") {
            cfg.lstm_univariate = p.flag(value);
        } else if (key == "lstm.layers") {
            cfg.lstm_grid.layers = p.counts(value);
        } else if (key == "lstm.cells") {
            cfg.lstm_grid.cells = p.counts(value);
        } else if (key == "lstm.learning_rates") {
            cfg.lstm_grid.learning_rates = p.reals(value);
        } else if (key == "lstm.epochs") {
            cfg.lstm_grid.epochs = p.counts(value);
        } else if (key == "lstm.batch_sizes") {
            cfg.lstm_grid.batch_sizes = p.counts(value);
        } else if (key == "lstm.dropout") {
            cfg.lstm_grid.dropout = p.real(value);
        } else if (key == "lstm.lookback") {
            cfg.lstm_grid.lookback = static_cast<std::size_t>(p.count(value));
        } else if (key == "additive.n_changepoints") {
            cfg.additive.n_changepoints = static_cast<std::size_t>(p.count(value));
        } else if (key == "additive.changepoint_range") {
            cfg.additive.changepoint_range = p.real(value);
        } else if (key == "additive.trend_penalty") {
            cfg.additive.trend_penalty = p.real(value);
        } else if (key == "additive.seasonality_penalty") {
            cfg.additive.seasonality_penalty = p.real(value);
        } else if (key == "additive.seasonalities") {
            cfg.additive.seasonalities.clear();
            if (!value.empty()) {
                for (auto item : split_list(value)) {
                    const auto colon = item.find(':');
                    if (colon == std::string_view::npos) {
                        p.fail("expected period:order");
                    }
                    cfg.additive.seasonalities.push_back(
                        {p.real(item.substr(0, colon)),
                         static_cast<std::size_t>(p.count(item.substr(colon + 1)))});
                }
            }
        } else if (key.starts_with("additive.event.")) {
            if (!events_reset) {
                cfg.additive.events.clear();
                events_reset = true;
            }
            additive::EventSpec event{std::string(key.substr(15)), {}};
            if (event.name.empty()) {
                p.fail("event name is empty");
            }
            for (auto item : split_list(value)) {
                event.months.push_back(MonthStamp::parse(item));
            }
            cfg.additive.events.push_back(std::move(event));
        } else {
            p.fail("unknown key");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    return parse_run_config(read_file(path), std::move(base));
}

std::string format_run_config(const RunConfig& cfg, bool with_jobs) {
    std::ostringstream os;
    const auto& g = cfg.lstm_grid;
    const auto& a = cfg.additive;
    os << "train_fraction = " << number(cfg.train_fraction) << '\n'
       << "seed = " << cfg.seed << '\n';
    if (with_jobs) {
        os << "jobs = " << cfg.jobs << '\n';
    }
    os << "plots = " << (cfg.plots ? "true" : "false") << '\n'
       << "lstm_univariate = " << (cfg.lstm_univariate ? "true" : "false") << '\n'
       << "lstm.layers = " << join(g.layers) << '\n'
       << "lstm.cells = " << join(g.cells) << '\n'
       << "lstm.learning_rates = " << join(g.learning_rates) << '\n'
       << "lstm.epochs = " << join(g.epochs) << '\n'
       << "lstm.batch_sizes = " << join(g.batch_sizes) << '\n'
       << "lstm.dropout = " << number(g.dropout) << '\n'
       << "lstm.lookback = " << g.lookback << '\n'
       << "additive.n_changepoints = " << a.n_changepoints << '\n'
       << "additive.changepoint_range = " << number(a.changepoint_range) << '\n'
       << "additive.trend_penalty = " << number(a.trend_penalty) << '\n'
       << "additive.seasonality_penalty = " << number(a.seasonality_penalty) << '\n'
       << "additive.seasonalities = ";
    for (std::size_t i = 0; i < a.seasonalities.size(); ++i) {
        os << (i ? "," : "") << number(a.seasonalities[i].period_months) << ':'
           << a.seasonalities[i].fourier_order;
    }
    os << '\n';
    for (const auto& e : a.events) {
        os << "additive.event." << e.name << " = ";
        for (std::size_t i = 0; i < e.months.size(); ++i) {
            os << (i ? "," : "") << e.months[i].to_string();
        }
        os << '\n';
    }
    return os.str();
}

} // namespace aqcast::bench
