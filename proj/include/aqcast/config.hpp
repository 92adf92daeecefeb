#pragma once

#include "aqcast/bench.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace aqcast::bench {

/// Flat `key = value` run configuration. Lines starting with '#' and blank
/// lines are ignored. Lists are comma separated.
///
///   train_fraction               0.8
///   seed                         0
///   jobs                         1
///   plots                        true|false
///   lstm_univariate              true|false
///   lstm.layers                  1,2
///   lstm.cells                   64,128
///   lstm.learning_rates          0.01,0.001
///   lstm.epochs                  200
///   lstm.batch_sizes             8
///   lstm.dropout                 0.2
///   lstm.lookback                12
///   additive.n_changepoints      25
///   additive.changepoint_range   0.8
///   additive.trend_penalty       10
///   additive.seasonality_penalty 0.1
///   additive.seasonalities       12:6        (period_months:order, ...)
///   additive.event.<name>        2020-04,2020-05
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Round-trippable rendering of every key above. `with_jobs = false` leaves
/// out the worker count, which never affects results.
std::string format_run_config(const RunConfig& cfg, bool with_jobs = true);

} // namespace aqcast::bench
