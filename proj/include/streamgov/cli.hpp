/**
 * @file cli.hpp
 * @brief `streamgov` command-line entry point.
 */
#pragma once

namespace streamgov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Parses arguments, runs one subcommand and returns the process exit status.
int run(int argc, const char* const* argv);

}  // namespace streamgov::cli
