#pragma once

#include <ostream>

namespace aqcast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Subcommands: bench, synth, forecast, eval. Run with --help for flags.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace aqcast::cli
