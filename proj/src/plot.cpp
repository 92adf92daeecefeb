#include "aqcast/plot.hpp"

#include "aqcast/bench.hpp"
#include "aqcast/error.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace aqcast::bench {

namespace {

using G = PlotGeometry;

constexpr std::array<const char*, 4> kPalette{"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

class Axes {
public:
    Axes(std::size_t n, double lo, double hi) : n_(n), lo_(lo), hi_(hi) {}

    double x(std::size_t i) const {
        const double width = G::kWidth - G::kMarginLeft - G::kMarginRight;
        if (n_ <= 1) {
            return G::kMarginLeft + width / 2.0;
        }
        return G::kMarginLeft + static_cast<double>(i) * width / static_cast<double>(n_ - 1);
    }

    double y(double v) const {
        const double height = G::kHeight - G::kMarginTop - G::kMarginBottom;
        if (!(hi_ > lo_)) {
            return G::kMarginTop + height / 2.0;
        }
        return G::kMarginTop + height * (1.0 - (v - lo_) / (hi_ - lo_));
    }

private:
    std::size_t n_;
    double lo_;
    double hi_;
};

void polyline(std::ostringstream& os, const std::vector<std::pair<double, double>>& pts,
              const char* color, const char* extra = "") {
    if (pts.empty()) {
        return;
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << extra
       << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        os << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
    }
    os << "\"/>\n";
}

} // namespace

ForecastBundle make_bundle(const SeriesOutcome& outcome) {
    ForecastBundle b;
    b.title = outcome.state + " " + std::string(to_string(outcome.pollutant));
    b.stamps = outcome.stamps;
    b.actual = outcome.observed;
    b.test_begin = outcome.split_index;
    if (outcome.lstm) {
        b.forecasts.emplace_back("lstm", *outcome.lstm);
    }
    if (outcome.additive) {
        b.forecasts.emplace_back("additive", outcome.additive->yhat.values());
    }
    return b;
}

std::string render_svg(const ForecastBundle& bundle) {
    const std::size_t n = bundle.stamps.size();
    if (n == 0) {
        throw Error(ErrorCode::InvalidInput, "cannot plot an empty bundle");
    }
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    const auto widen = [&](double v) {
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
    };
    for (const auto& v : bundle.actual) {
        if (v) {
            widen(*v);
        }
    }
    for (const auto& [_, values] : bundle.forecasts) {
        std::for_each(values.begin(), values.end(), widen);
    }
    const double pad = (hi - lo) * 0.05;
    const Axes axes(n, lo - pad, hi + pad);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(G::kWidth) << "\" height=\""
       << fmt(G::kHeight) << "\" viewBox=\"0 0 " << fmt(G::kWidth) << ' ' << fmt(G::kHeight)
       << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(G::kWidth) << "\" height=\"" << fmt(G::kHeight)
       << "\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << fmt(G::kMarginLeft) << "\" y=\"24\" font-family=\"sans-serif\" "
       << "font-size=\"14\">" << escape(bundle.title) << "</text>\n";

    const double top = G::kMarginTop;
    const double bottom = G::kHeight - G::kMarginBottom;
    if (bundle.test_begin < n) {
        const double x0 = axes.x(bundle.test_begin);
        const double x1 = axes.x(n - 1);
        os << "<rect id=\"test-window\" x=\"" << fmt(x0) << "\" y=\"" << fmt(top) << "\" width=\""
           << fmt(x1 - x0) << "\" height=\"" << fmt(bottom - top)
           << "\" fill=\"#999999\" fill-opacity=\"0.2\"/>\n";
    }

    // axes box and end labels
    os << "<rect x=\"" << fmt(G::kMarginLeft) << "\" y=\"" << fmt(top) << "\" width=\""
       << fmt(G::kWidth - G::kMarginLeft - G::kMarginRight) << "\" height=\"" << fmt(bottom - top)
       << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    const auto label = [&](double x, double y, const std::string& text, const char* anchor) {
        os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" "
           << "font-size=\"11\" text-anchor=\"" << anchor << "\">" << escape(text) << "</text>\n";
    };
    label(axes.x(0), bottom + 18, bundle.stamps.front().to_string(), "middle");
    if (n > 1) {
        label(axes.x(n - 1), bottom + 18, bundle.stamps.back().to_string(), "middle");
    }
    if (any) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", hi);
        label(G::kMarginLeft - 6, top + 4, buf, "end");
        std::snprintf(buf, sizeof buf, "%.3g", lo);
        label(G::kMarginLeft - 6, bottom, buf, "end");
    }

    // Actual series, broken at missing points.
    std::vector<std::pair<double, double>> run;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i < n && bundle.actual[i]) {
            run.emplace_back(axes.x(i), axes.y(*bundle.actual[i]));
            continue;
        }
        if (run.size() == 1) {
            os << "<circle cx=\"" << fmt(run[0].first) << "\" cy=\"" << fmt(run[0].second)
               << "\" r=\"2\" fill=\"#000000\"/>\n";
        } else {
            polyline(os, run, "#000000");
        }
        run.clear();
    }

    std::vector<std::pair<std::string, const char*>> legend{{"actual", "#000000"}};
    for (std::size_t k = 0; k < bundle.forecasts.size(); ++k) {
        const auto& [name, values] = bundle.forecasts[k];
        const char* color = kPalette[k % kPalette.size()];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t j = 0; j < values.size() && bundle.test_begin + j < n; ++j) {
            pts.emplace_back(axes.x(bundle.test_begin + j), axes.y(values[j]));
        }
        polyline(os, pts, color, " stroke-dasharray=\"5,3\"");
        legend.emplace_back(name, color);
    }

    const double lx = G::kWidth - G::kMarginRight + 16;
    for (std::size_t k = 0; k < legend.size(); ++k) {
        const double ly = top + 14 + 18 * static_cast<double>(k);
        os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 20)
           << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << legend[k].second
           << "\" stroke-width=\"2\"/>\n";
        label(lx + 26, ly, legend[k].first, "start");
    }
    os << "</svg>\n";
    return os.str();
}

void render_plot(const ForecastBundle& bundle, const std::filesystem::path& path) {
    write_file(path, render_svg(bundle));
}

} // namespace aqcast::bench
