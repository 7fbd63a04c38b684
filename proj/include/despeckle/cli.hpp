#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace despeckle {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command-line front end. `args` excludes the program name.
///
/// Subcommands: denoise, add-noise, benchmark, gen-pairs, metrics.
/// Global flags: --threads N, --seed S, --config PATH.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace despeckle
