#include "aqcast/additive.hpp"
#include "aqcast/error.hpp"
#include "oracles/ridge_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace aqcast;
using namespace aqcast::additive;

namespace {

const MonthStamp kOrigin{2018, 1};

TimeSeries dense_series(const std::vector<double>& v) { return TimeSeries::from_values(kOrigin, v); }

std::vector<double> seasonal_trend(std::size_t n, double base, double slope, double amp, double sigma,
                                   std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        y[i] = base + slope * t + amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 12.0) +
               sigma * rng.normal();
    }
    return y;
}

AdditiveConfig line_only() {
    AdditiveConfig cfg;
    cfg.n_changepoints = 0;
    cfg.seasonalities.clear();
    return cfg;
}

std::vector<double> flat_coeffs(const AdditiveFit& f) {
    std::vector<double> b{f.m, f.k};
    b.insert(b.end(), f.deltas.begin(), f.deltas.end());
    for (const auto& s : f.seasonalities) {
        b.insert(b.end(), s.coeffs.begin(), s.coeffs.end());
    }
    for (const auto& e : f.event_effects) {
        b.push_back(e.effect);
    }
    return b;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an aqcast::Error");
    return ErrorCode::InvalidInput;
}

} // namespace

TEST_CASE("place_changepoints") {
    AdditiveConfig cfg;
    cfg.n_changepoints = 4;
    cfg.changepoint_range = 0.8;
    const auto locs = place_changepoints(model_time(50, 50), cfg);
    REQUIRE(locs.size() == 4);
    const double want[] = {0.16, 0.32, 0.48, 0.64};
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(locs[j] == doctest::Approx(want[j]).epsilon(1e-15));
    }

    cfg.n_changepoints = 0;
    CHECK(place_changepoints(model_time(50, 50), cfg).empty());

    cfg.n_changepoints = 25;
    const auto few = place_changepoints(model_time(3, 3), cfg);
    CHECK(few.size() <= 1);
    CHECK_THROWS_AS((void)place_changepoints(model_time(1, 1), cfg), Error);
}

TEST_CASE("changepoints are increasing and inside the range") {
    testing::for_all(41, 200, [](Rng& rng, int) {
        AdditiveConfig cfg;
        cfg.n_changepoints = rng.below(40);
        cfg.changepoint_range = rng.uniform(0.05, 1.0);
        const auto n = 2 + rng.below(100);
        const auto locs = place_changepoints(model_time(n, n), cfg);
        CHECK(locs.size() <= cfg.n_changepoints);
        for (std::size_t j = 0; j < locs.size(); ++j) {
            CHECK(locs[j] > 0.0);
            CHECK(locs[j] <= cfg.changepoint_range + 1e-15);
            if (j > 0) {
                CHECK(locs[j] > locs[j - 1]);
            }
        }
    });
}

TEST_CASE("trend_basis") {
    const ModelTime half({0.5}, 1.0);
    const std::vector<double> knots{0.25, 0.75};
    const auto x = trend_basis(half, knots);
    REQUIRE(x.cols() == 4);
    CHECK(x(0, 0) == 1.0);
    CHECK(x(0, 1) == 0.5);
    CHECK(x(0, 2) == 0.25);
    CHECK(x(0, 3) == 0.0);

    const auto plain = trend_basis(model_time(3, 3), {});
    REQUIRE(plain.cols() == 2);
    CHECK(plain(2, 1) == 1.0);

    const ModelTime at_knot({0.25}, 1.0);
    CHECK(trend_basis(at_knot, knots)(0, 2) == 0.0);
}

TEST_CASE("fourier_basis") {
    // tau = t * months_per_unit; pick months_per_unit = 1 so tau = t
    const ModelTime t({0.0, 6.0, 12.0}, 1.0);
    const auto x = fourier_basis(t, 12.0, 3);
    REQUIRE(x.cols() == 6);
    for (Eigen::Index h = 0; h < 3; ++h) {
        CHECK(x(0, 2 * h) == 1.0);
        CHECK(x(0, 2 * h + 1) == 0.0);
    }
    CHECK(x(1, 0) == doctest::Approx(-1.0));
    CHECK(x(1, 1) == doctest::Approx(0.0).scale(1.0));
    for (Eigen::Index c = 0; c < 6; ++c) {
        CHECK(x(2, c) == doctest::Approx(x(0, c)).scale(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)fourier_basis(t, 0.0, 1), Error);
    CHECK_THROWS_AS((void)fourier_basis(t, 12.0, 0), Error);
}

TEST_CASE("fourier columns repeat every period") {
    testing::for_all(42, 100, [](Rng& rng, int) {
        const double period = rng.uniform(1.0, 24.0);
        const double tau = rng.uniform(0, 100);
        const ModelTime t({tau, tau + period}, 1.0);
        const auto x = fourier_basis(t, period, 1 + rng.below(8));
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            CHECK(x(0, c) == doctest::Approx(x(1, c)).scale(1.0).epsilon(1e-9));
        }
    });
}

TEST_CASE("event_basis") {
    const auto stamps = stamp_range({2020, 1}, 6);
    CHECK(event_basis(stamps, {}).cols() == 0);

    const std::vector<EventSpec> lockdown{{"lockdown", {{2020, 4}}}};
    const auto x = event_basis(stamps, lockdown);
    REQUIRE(x.cols() == 1);
    const std::vector<double> want{0, 0, 0, 1, 0, 0};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(x(static_cast<Eigen::Index>(i), 0) == want[i]);
    }
    const std::vector<EventSpec> outside{{"later", {{2021, 4}}}};
    CHECK(event_basis(stamps, outside).sum() == 0.0);
}

TEST_CASE("exact line recovery") {
    std::vector<double> y(20);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = 3.0 + 2.0 * static_cast<double>(i) / 19.0;
    }
    const auto f = fit(dense_series(y), line_only());
    CHECK(f.m == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.k == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.sigma_hat < 1e-9);
    CHECK(f.mean_monthly_slope() == doctest::Approx(2.0 / 19.0).epsilon(1e-12));

    // with seasonality and changepoints enabled the line is still an exact
    // zero-penalty optimum
    const auto full = fit(dense_series(y), AdditiveConfig{});
    CHECK(full.sigma_hat < 1e-9);
    CHECK(full.k == doctest::Approx(2.0).epsilon(1e-9));

    const ModelTime two({2.0}, f.months_per_unit);
    const auto p = predict(f, two);
    CHECK(*p.yhat[0] == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(p.seasonal[0] == 0.0);
    CHECK(p.yhat.start() == kOrigin.plus_months(38));
}

TEST_CASE("constant series drives every non-level term to zero") {
    const auto f = fit(dense_series(std::vector<double>(40, 0.7)), AdditiveConfig{});
    CHECK(f.m == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(std::abs(f.k) < 1e-10);
    for (double d : f.deltas) {
        CHECK(std::abs(d) < 1e-10);
    }
    for (const auto& s : f.seasonalities) {
        for (double c : s.coeffs) {
            CHECK(std::abs(c) < 1e-10);
        }
    }
}

TEST_CASE("fit matches the independent ridge oracle") {
    testing::for_all(43, 25, [](Rng& rng, int c) {
        const auto n = 12 + rng.below(70);
        AdditiveConfig cfg;
        cfg.n_changepoints = rng.below(30);
        cfg.changepoint_range = rng.uniform(0.5, 1.0);
        cfg.trend_penalty = rng.uniform(0.01, 20);
        cfg.seasonality_penalty = rng.uniform(0.01, 2);
        cfg.seasonalities = {{12.0, 1 + rng.below(6)}};
        if (c % 3 == 0) {
            cfg.seasonalities.push_back({6.0, 2});
        }
        std::vector<std::vector<std::size_t>> event_rows;
        if (c % 2 == 0) {
            const auto row = rng.below(n);
            cfg.events.push_back({"spike", {kOrigin.plus_months(static_cast<long>(row))}});
            event_rows.push_back({row});
        }
        const auto y = testing::random_values(rng, n, -1, 1);
        auto holes = testing::with_holes(y, rng, 0.15);
        holes[0] = y[0];
        holes[n - 1] = y[n - 1];
        std::vector<bool> use(n);
        for (std::size_t i = 0; i < n; ++i) {
            use[i] = holes[i].has_value();
        }

        const auto f = fit(TimeSeries(kOrigin, holes), cfg);
        std::vector<std::pair<double, std::size_t>> seasons;
        for (const auto& s : cfg.seasonalities) {
            seasons.emplace_back(s.period_months, s.fourier_order);
        }
        const auto design = oracle::additive_design(n, f.changepoint_locs, seasons, event_rows,
                                                    cfg.trend_penalty, cfg.seasonality_penalty);
        const auto beta = oracle::solve_ridge(design, y, use);
        const auto got = flat_coeffs(f);
        REQUIRE(got.size() == beta.size());
        for (std::size_t j = 0; j < beta.size(); ++j) {
            CAPTURE(j);
            CHECK(testing::close_rel(got[j], static_cast<double>(beta[j]), 1e-7, 1e-9));
        }

        // in-sample prediction reproduces the oracle's fitted values
        const auto p = predict(f, model_time(n, n));
        for (std::size_t i = 0; i < n; ++i) {
            const double want = static_cast<double>(oracle::row_dot(design.x[i], beta));
            CHECK(*p.yhat[i] == doctest::Approx(want).epsilon(1e-8).scale(1.0));
            CHECK(*p.yhat[i] ==
                  doctest::Approx(p.trend[i] + p.seasonal[i] + p.events[i]).epsilon(1e-14).scale(1.0));
        }
    });
}

TEST_CASE("seasonal trend recovery") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CAPTURE(seed);
        const auto y = seasonal_trend(72, 0.5, 0.3, 0.2, 0.02, seed);
        const auto f = fit(dense_series(y), AdditiveConfig{});
        const double slope = f.trend_at(1.0) - f.trend_at(0.0);
        CHECK(std::abs(slope - 0.3) <= 0.1 * 0.3);
        REQUIRE(f.seasonalities.size() == 1);
        CHECK(std::abs(f.seasonalities[0].harmonic_amplitude(1) - 0.2) <= 0.15 * 0.2);
    }
}

TEST_CASE("fit is linear in the data") {
    testing::for_all(44, 30, [](Rng& rng, int) {
        const auto n = 10 + rng.below(50);
        const auto y = testing::random_values(rng, n, -1, 1);
        const double a = rng.uniform(-3, 3);
        const double b = rng.uniform(-3, 3);
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = a * y[i] + b;
        }
        const AdditiveConfig cfg;
        const auto fy = flat_coeffs(fit(dense_series(y), cfg));
        const auto fz = flat_coeffs(fit(dense_series(z), cfg));
        REQUIRE(fy.size() == fz.size());
        // an offset only moves the unpenalized intercept
        CHECK(fz[0] == doctest::Approx(a * fy[0] + b).epsilon(1e-8).scale(1.0));
        for (std::size_t j = 1; j < fy.size(); ++j) {
            CHECK(fz[j] == doctest::Approx(a * fy[j]).epsilon(1e-8).scale(1.0));
        }
    });
}

TEST_CASE("fitted trend is continuous at the changepoints") {
    const auto y = seasonal_trend(60, 1.0, -0.5, 0.3, 0.1, 9);
    const auto f = fit(dense_series(y), AdditiveConfig{});
    for (double s : f.changepoint_locs) {
        CHECK(f.trend_at(s - 1e-9) == doctest::Approx(f.trend_at(s + 1e-9)).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("zero changepoint deltas reduce to a straight line") {
    testing::for_all(45, 50, [](Rng& rng, int) {
        AdditiveFit f;
        f.m = rng.uniform(-2, 2);
        f.k = rng.uniform(-2, 2);
        f.months_per_unit = 10;
        const auto j = rng.below(10);
        for (std::size_t i = 0; i < j; ++i) {
            f.changepoint_locs.push_back(static_cast<double>(i + 1) / static_cast<double>(j + 1));
            f.deltas.push_back(0.0);
        }
        const double t = rng.uniform(-1, 3);
        CHECK(f.trend_at(t) == doctest::Approx(f.m + f.k * t).epsilon(1e-14).scale(1.0));
    });
}

TEST_CASE("seasonal component repeats every period in the forecast") {
    const auto y = seasonal_trend(48, 0.5, 0.3, 0.2, 0.02, 3);
    const auto f = fit(dense_series(y), AdditiveConfig{});
    const auto p = predict(f, horizon_time(48, 36));
    for (std::size_t i = 0; i + 12 < 36; ++i) {
        CHECK(p.seasonal[i] == doctest::Approx(p.seasonal[i + 12]).epsilon(1e-9).scale(1.0));
    }
    CHECK(p.yhat.start() == kOrigin.plus_months(48));
}

TEST_CASE("horizon_time continues the training clock") {
    const auto h = horizon_time(58, 14);
    REQUIRE(h.size() == 14);
    CHECK(h[0] == doctest::Approx(58.0 / 57.0).epsilon(1e-15));
    CHECK(h.months_per_unit() == 57.0);
}

TEST_CASE("fitting is deterministic") {
    const auto y = seasonal_trend(72, 0.5, 0.3, 0.2, 0.02, 1);
    const auto a = fit(dense_series(y), AdditiveConfig{});
    const auto b = fit(dense_series(y), AdditiveConfig{});
    CHECK(flat_coeffs(a) == flat_coeffs(b));
    CHECK(a.sigma_hat == b.sigma_hat);
}

TEST_CASE("weekly seasonality is skipped with a diagnostic") {
    const auto y = seasonal_trend(60, 0.5, 0.3, 0.2, 0.02, 2);
    AdditiveConfig with_weekly;
    with_weekly.seasonalities.push_back({kWeeklyPeriodMonths, 3});
    const auto a = fit(dense_series(y), with_weekly);
    const auto b = fit(dense_series(y), AdditiveConfig{});
    CHECK(a.diagnostics.size() == 1);
    CHECK(b.diagnostics.empty());
    CHECK(flat_coeffs(a) == flat_coeffs(b));
}

TEST_CASE("event effects are recovered") {
    auto y = seasonal_trend(60, 0.5, 0.3, 0.0, 0.0, 0);
    y[30] += 0.4;
    y[31] += 0.4;
    AdditiveConfig cfg = line_only();
    cfg.seasonality_penalty = 1e-6;
    cfg.events.push_back({"lockdown", {kOrigin.plus_months(30), kOrigin.plus_months(31)}});
    const auto f = fit(dense_series(y), cfg);
    REQUIRE(f.event_effects.size() == 1);
    CHECK(f.event_effects[0].effect == doctest::Approx(0.4).epsilon(1e-4));
    const auto p = predict(f, model_time(60, 60));
    CHECK(p.events[30] == f.event_effects[0].effect);
    CHECK(p.events[29] == 0.0);
}

TEST_CASE("fit errors") {
    CHECK(code_of([] {
              (void)fit(TimeSeries(kOrigin, {1.0, std::nullopt, std::nullopt}), AdditiveConfig{});
          }) == ErrorCode::InsufficientData);

    AdditiveConfig unpenalized;
    unpenalized.trend_penalty = 0;
    unpenalized.seasonality_penalty = 0;
    CHECK(code_of([&] { (void)fit(dense_series(seasonal_trend(10, 1, 1, 1, 0.1, 0)), unpenalized); }) ==
          ErrorCode::SingularFit);

    AdditiveConfig bad;
    bad.changepoint_range = 1.5;
    CHECK(code_of([&] { (void)fit(dense_series({1, 2, 3}), bad); }) == ErrorCode::InvalidSpec);
    bad = {};
    bad.trend_penalty = -1;
    CHECK(code_of([&] { (void)fit(dense_series({1, 2, 3}), bad); }) == ErrorCode::InvalidSpec);
}
