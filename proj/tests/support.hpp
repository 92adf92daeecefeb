#pragma once

// Shared helpers for the unit tests: tolerant comparisons and a tiny
// generator layer for property tests.

#include "aqcast/rng.hpp"
#include "aqcast/series.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace testing {

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

/// Runs `body(rng, case_index)` for `cases` independently seeded cases.
template <typename Body>
void for_all(std::uint64_t seed, int cases, Body&& body) {
    for (int c = 0; c < cases; ++c) {
        aqcast::Rng rng(aqcast::derive_seed(seed, static_cast<std::uint64_t>(c)));
        body(rng, c);
    }
}

inline std::vector<double> random_values(aqcast::Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(lo, hi);
    }
    return v;
}

/// Values spread over many decades, either sign.
inline std::vector<double> random_magnitudes(aqcast::Rng& rng, std::size_t n, double lo_exp,
                                             double hi_exp) {
    std::vector<double> v(n);
    for (auto& x : v) {
        const double mag = std::pow(10.0, rng.uniform(lo_exp, hi_exp));
        x = rng.uniform() < 0.5 ? -mag : mag;
    }
    return v;
}

inline std::vector<std::optional<double>> with_holes(const std::vector<double>& v, aqcast::Rng& rng,
                                                     double p_missing) {
    std::vector<std::optional<double>> out(v.begin(), v.end());
    for (auto& x : out) {
        if (rng.uniform() < p_missing) {
            x.reset();
        }
    }
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("aqcast_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
