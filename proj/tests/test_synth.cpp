#include "aqcast/error.hpp"
#include "aqcast/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace aqcast;
using namespace aqcast::synth;

namespace {

double mean_of(const TimeSeries& s, std::size_t begin, std::size_t end) {
    double sum = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sum += *s[i];
    }
    return sum / static_cast<double>(end - begin);
}

} // namespace

TEST_CASE("regime names") {
    for (auto k : {RegimeKind::SeasonalTrend, RegimeKind::StructuralBreak, RegimeKind::NearConstant}) {
        CHECK(parse_regime(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_regime("trend"), Error);
}

TEST_CASE("near-constant with no noise is exactly constant") {
    const auto spec = default_spec(RegimeKind::NearConstant);
    const auto s = generate(spec).target();
    CHECK(s.size() == 72);
    for (double v : s.values()) {
        CHECK(v == spec.base);
    }
}

TEST_CASE("noise-free seasonal trend equals its closed form") {
    RegimeSpec spec;
    spec.noise_sigma = 0.0;
    const auto s = generate(spec).target().values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = static_cast<double>(i) / 71.0;
        const double want = 0.5 + 0.3 * t + 0.2 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 12.0);
        CHECK(std::abs(s[i] - want) <= 1e-12);
    }

    spec.seasonal_amp = 0.0;
    const auto flat = generate(spec).target().values();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        CHECK(flat[i] == doctest::Approx(0.5 + 0.3 * static_cast<double>(i) / 71.0).epsilon(1e-15));
    }
}

TEST_CASE("a structural break is realized") {
    // level series, so the dip is not masked by trend or season
    RegimeSpec spec;
    spec.kind = RegimeKind::StructuralBreak;
    spec.trend_slope = 0.0;
    spec.seasonal_amp = 0.0;
    spec.break_month_index = 24;
    spec.break_drop_fraction = 0.5;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        spec.seed = seed;
        const auto s = generate(spec).target();
        CHECK(mean_of(s, 24, 28) < 0.6 * mean_of(s, 0, 24));
    }
}

TEST_CASE("break shape drops then recovers linearly") {
    RegimeSpec spec;
    spec.kind = RegimeKind::StructuralBreak;
    spec.noise_sigma = 0.0;
    spec.break_month_index = 30;
    spec.break_drop_fraction = 0.4;
    RegimeSpec plain = spec;
    plain.kind = RegimeKind::SeasonalTrend;
    for (std::size_t i = 0; i < 72; ++i) {
        const double gap = regime_mean(plain, i) - regime_mean(spec, i);
        double want = 0.0;
        if (i >= 30 && i < 42) {
            want = 0.4 * 0.5 * (1.0 - static_cast<double>(i - 30) / 12.0);
        }
        CHECK(gap == doctest::Approx(want).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("zero drop reproduces the seasonal regime") {
    testing::for_all(61, 20, [](Rng& rng, int) {
        RegimeSpec a;
        a.seed = rng.next();
        a.break_month_index = rng.below(72);
        a.break_drop_fraction = 0.0;
        a.missing_fraction = 0.1;
        RegimeSpec b = a;
        a.kind = RegimeKind::StructuralBreak;
        CHECK(generate(a).target() == generate(b).target());
    });
}

TEST_CASE("missing count is exact") {
    testing::for_all(62, 100, [](Rng& rng, int) {
        RegimeSpec spec;
        spec.n_months = 2 + rng.below(120);
        spec.missing_fraction = rng.uniform(0, 0.9);
        spec.seed = rng.next();
        const auto want = static_cast<std::size_t>(std::llround(spec.missing_fraction * static_cast<double>(spec.n_months)));
        if (spec.n_months - want < 2) {
            CHECK_THROWS_AS((void)generate(spec), Error);
            return;
        }
        const auto s = generate(spec).target();
        CHECK(s.size() - s.present_count() == want);
    });
}

TEST_CASE("missing flags do not disturb the noise draws") {
    RegimeSpec spec;
    spec.seed = 5;
    const auto full = generate(spec).target();
    spec.missing_fraction = 0.25;
    const auto holey = generate(spec).target();
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (holey.is_present(i)) {
            CHECK(*holey[i] == *full[i]);
        }
    }
}

TEST_CASE("spec validation") {
    const auto bad = [](auto mutate) {
        RegimeSpec s;
        mutate(s);
        try {
            (void)generate(s);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidSpec);
        }
    };
    bad([](RegimeSpec& s) { s.n_months = 1; });
    bad([](RegimeSpec& s) { s.noise_sigma = -1; });
    bad([](RegimeSpec& s) { s.missing_fraction = 1.0; });
    bad([](RegimeSpec& s) { s.n_months = 4, s.missing_fraction = 0.7; });
    bad([](RegimeSpec& s) { s.kind = RegimeKind::StructuralBreak, s.break_month_index = 72; });
    bad([](RegimeSpec& s) { s.kind = RegimeKind::StructuralBreak, s.break_drop_fraction = 1.5; });
    bad([](RegimeSpec& s) { s.kind = RegimeKind::NearConstant, s.base = 1.0, s.noise_sigma = 0.01; });
    RegimeSpec ok;
    ok.kind = RegimeKind::NearConstant;
    ok.base = 1.0;
    ok.noise_sigma = 1e-3;
    CHECK_NOTHROW((void)generate(ok));
}

TEST_CASE("suites") {
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    const auto spec = default_spec(RegimeKind::SeasonalTrend);
    const auto a = generate_suite(seeds, spec);
    const auto b = generate_suite(seeds, spec);
    CHECK(a == b);
    REQUIRE(a.size() == 5);
    CHECK(a[0].state() == "SYNTH_000");
    CHECK(a[4].state() == "SYNTH_004");
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            CHECK_FALSE(a[i].target() == a[j].target());
        }
    }
    std::vector<std::uint64_t> twenty(20);
    std::iota(twenty.begin(), twenty.end(), std::uint64_t{100});
    CHECK(generate_suite(twenty, spec).size() == 20);
}

TEST_CASE("default specs") {
    const auto brk = default_spec(RegimeKind::StructuralBreak);
    CHECK(brk.pollutant == PollutantKind::SO4);
    // last training month of an 80/20 split of 72 months
    CHECK(brk.break_month_index == 57);
    CHECK(test_adjacent_break_index(60) == 47);
    CHECK(default_spec(RegimeKind::NearConstant).pollutant == PollutantKind::SO2);
    CHECK(default_spec(RegimeKind::SeasonalTrend).start == MonthStamp(2018, 1));
}
