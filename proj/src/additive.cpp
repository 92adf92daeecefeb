#include "aqcast/additive.hpp"

#include "aqcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace aqcast::additive {

namespace {

// Below this reciprocal condition estimate the normal matrix is treated as
// singular.
constexpr double kMinRcond = 1e-13;

struct Design {
    Eigen::MatrixXd x;
    std::vector<FittedSeasonality> seasonalities; // coefficients unset
    std::vector<std::string> diagnostics;
};

std::vector<Seasonality> usable_seasonalities(const AdditiveConfig& cfg,
                                              std::vector<std::string>& diagnostics) {
    std::vector<Seasonality> out;
    for (const auto& s : cfg.seasonalities) {
        // Monthly sampling cannot resolve cycles shorter than one month.
        if (s.period_months < 1.0) {
            std::ostringstream msg;
            msg << "seasonality with period " << s.period_months
                << " months is shorter than the monthly sampling interval; skipped";
            diagnostics.push_back(msg.str());
            continue;
        }
        out.push_back(s);
    }
    return out;
}

Design build_design(const ModelTime& t, std::span<const MonthStamp> stamps,
                    std::span<const double> locs, const AdditiveConfig& cfg) {
    Design d;
    const auto seasons = usable_seasonalities(cfg, d.diagnostics);
    std::vector<Eigen::MatrixXd> blocks;
    blocks.push_back(trend_basis(t, locs));
    for (const auto& s : seasons) {
        blocks.push_back(fourier_basis(t, s.period_months, s.fourier_order));
        d.seasonalities.push_back({s, {}});
    }
    blocks.push_back(event_basis(stamps, cfg.events));

    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        cols += b.cols();
    }
    d.x.resize(static_cast<Eigen::Index>(t.size()), cols);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        d.x.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return d;
}

} // namespace

void AdditiveConfig::validate() const {
    if (!(changepoint_range > 0.0 && changepoint_range <= 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "changepoint_range must lie in (0, 1]");
    }
    if (!(trend_penalty >= 0.0) || !(seasonality_penalty >= 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "penalties must be non-negative");
    }
    for (const auto& s : seasonalities) {
        if (!(s.period_months > 0.0)) {
            throw Error(ErrorCode::InvalidSpec, "seasonality period must be positive");
        }
        if (s.fourier_order < 1) {
            throw Error(ErrorCode::InvalidSpec, "fourier order must be at least 1");
        }
    }
}

double FittedSeasonality::harmonic_amplitude(std::size_t n) const {
    if (n < 1 || n > spec.fourier_order) {
        throw Error(ErrorCode::InvalidInput, "harmonic index out of range");
    }
    return std::hypot(coeffs[2 * (n - 1)], coeffs[2 * (n - 1) + 1]);
}

double AdditiveFit::trend_at(double t) const {
    double g = m + k * t;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        g += deltas[j] * std::max(t - changepoint_locs[j], 0.0);
    }
    return g;
}

double AdditiveFit::mean_monthly_slope() const {
    if (months_per_unit <= 0.0) {
        return 0.0;
    }
    return (trend_at(1.0) - trend_at(0.0)) / months_per_unit;
}

std::vector<double> place_changepoints(const ModelTime& train_t, const AdditiveConfig& cfg) {
    const std::size_t n = train_t.size();
    if (n < 2) {
        throw Error(ErrorCode::InsufficientData, "changepoints need at least 2 training points");
    }
    std::vector<double> locs;
    if (cfg.n_changepoints == 0) {
        return locs;
    }
    if (n <= cfg.n_changepoints) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (train_t[i] <= cfg.changepoint_range) {
                locs.push_back(train_t[i]);
            }
        }
        return locs;
    }
    const double step = cfg.changepoint_range / static_cast<double>(cfg.n_changepoints + 1);
    for (std::size_t j = 1; j <= cfg.n_changepoints; ++j) {
        locs.push_back(static_cast<double>(j) * step);
    }
    return locs;
}

Eigen::MatrixXd trend_basis(const ModelTime& t, std::span<const double> changepoint_locs) {
    const auto rows = static_cast<Eigen::Index>(t.size());
    const auto hinges = static_cast<Eigen::Index>(changepoint_locs.size());
    Eigen::MatrixXd x(rows, 2 + hinges);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double tr = t[static_cast<std::size_t>(r)];
        x(r, 0) = 1.0;
        x(r, 1) = tr;
        for (Eigen::Index j = 0; j < hinges; ++j) {
            x(r, 2 + j) = std::max(tr - changepoint_locs[static_cast<std::size_t>(j)], 0.0);
        }
    }
    return x;
}

Eigen::MatrixXd fourier_basis(const ModelTime& t, double period_months, std::size_t order) {
    if (!(period_months > 0.0) || order < 1) {
        throw Error(ErrorCode::InvalidInput, "fourier basis needs period > 0 and order >= 1");
    }
    const auto rows = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(2 * order));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double tau = t.to_months(t[static_cast<std::size_t>(r)]);
        for (std::size_t n = 1; n <= order; ++n) {
            const double angle =
                2.0 * std::numbers::pi * static_cast<double>(n) * tau / period_months;
            const auto c = static_cast<Eigen::Index>(2 * (n - 1));
            x(r, c) = std::cos(angle);
            x(r, c + 1) = std::sin(angle);
        }
    }
    return x;
}

Eigen::MatrixXd event_basis(std::span<const MonthStamp> stamps, std::span<const EventSpec> events) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(stamps.size()),
                                              static_cast<Eigen::Index>(events.size()));
    for (std::size_t e = 0; e < events.size(); ++e) {
        for (std::size_t r = 0; r < stamps.size(); ++r) {
            const auto& months = events[e].months;
            if (std::find(months.begin(), months.end(), stamps[r]) != months.end()) {
                x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e)) = 1.0;
            }
        }
    }
    return x;
}

AdditiveFit fit(const TimeSeries& train, const AdditiveConfig& cfg) {
    cfg.validate();
    if (train.present_count() < 2) {
        throw Error(ErrorCode::InsufficientData, "additive fit needs at least 2 present points");
    }
    const std::size_t n = train.size();
    const ModelTime t = model_time(n, n);
    const auto stamps = train.stamps();

    AdditiveFit out;
    out.origin = train.start();
    out.months_per_unit = t.months_per_unit();
    out.changepoint_locs = place_changepoints(t, cfg);

    Design design = build_design(t, stamps, out.changepoint_locs, cfg);
    out.diagnostics = std::move(design.diagnostics);

    // Drop missing rows.
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (train.is_present(i)) {
            rows.push_back(static_cast<Eigen::Index>(i));
        }
    }
    const auto p = design.x.cols();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = design.x.row(rows[r]);
        y(static_cast<Eigen::Index>(r)) = *train[static_cast<std::size_t>(rows[r])];
    }

    const auto hinges = static_cast<Eigen::Index>(out.changepoint_locs.size());
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, cfg.seasonality_penalty);
    penalty.head(2).setZero();
    penalty.segment(2, hinges).setConstant(cfg.trend_penalty);

    Eigen::MatrixXd normal = x.transpose() * x;
    normal.diagonal() += penalty;
    const Eigen::VectorXd rhs = x.transpose() * y;

    const Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    if (solver.info() != Eigen::Success || !(solver.rcond() > kMinRcond)) {
        throw Error(ErrorCode::SingularFit,
                    "normal matrix is singular; add a trend or seasonality penalty");
    }
    const Eigen::VectorXd beta = solver.solve(rhs);
    if (!beta.allFinite()) {
        throw Error(ErrorCode::Numeric, "additive fit produced non-finite coefficients");
    }

    out.m = beta(0);
    out.k = beta(1);
    out.deltas.assign(beta.data() + 2, beta.data() + 2 + hinges);
    Eigen::Index at = 2 + hinges;
    for (auto& s : design.seasonalities) {
        const auto width = static_cast<Eigen::Index>(2 * s.spec.fourier_order);
        s.coeffs.assign(beta.data() + at, beta.data() + at + width);
        at += width;
    }
    out.seasonalities = std::move(design.seasonalities);
    for (const auto& e : cfg.events) {
        out.event_effects.push_back({e, beta(at++)});
    }

    const Eigen::VectorXd resid = y - x * beta;
    out.sigma_hat = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
    return out;
}

AdditiveForecast predict(const AdditiveFit& fit, const ModelTime& horizon_t) {
    if (horizon_t.size() == 0) {
        throw Error(ErrorCode::EmptyRange, "prediction horizon is empty");
    }
    const ModelTime t(std::vector<double>(horizon_t.values().begin(), horizon_t.values().end()),
                      fit.months_per_unit);
    const std::size_t n = t.size();
    std::vector<MonthStamp> stamps;
    stamps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        stamps.push_back(fit.origin.plus_months(std::lround(t.to_months(t[i]))));
    }

    std::vector<double> trend(n);
    std::vector<double> seasonal(n, 0.0);
    std::vector<double> events(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        trend[i] = fit.trend_at(t[i]);
    }
    for (const auto& s : fit.seasonalities) {
        const Eigen::MatrixXd basis = fourier_basis(t, s.spec.period_months, s.spec.fourier_order);
        const Eigen::Map<const Eigen::VectorXd> coeffs(s.coeffs.data(),
                                                       static_cast<Eigen::Index>(s.coeffs.size()));
        const Eigen::VectorXd contrib = basis * coeffs;
        for (std::size_t i = 0; i < n; ++i) {
            seasonal[i] += contrib(static_cast<Eigen::Index>(i));
        }
    }
    for (const auto& e : fit.event_effects) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& months = e.event.months;
            if (std::find(months.begin(), months.end(), stamps[i]) != months.end()) {
                events[i] += e.effect;
            }
        }
    }

    std::vector<std::optional<double>> yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
        yhat[i] = trend[i] + seasonal[i] + events[i];
    }
    return {TimeSeries(stamps.front(), std::move(yhat)), std::move(trend), std::move(seasonal),
            std::move(events)};
}

ModelTime horizon_time(std::size_t train_len, std::size_t horizon) {
    return model_time(train_len + horizon, train_len).slice(train_len, horizon);
}

} // namespace aqcast::additive
