#pragma once

#include <string>
#include <vector>

namespace ddp::cli {

/// Exit codes beyond 0/1.
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitTrainingDiverged = 3;
inline constexpr int kExitSweepFailures = 4;

/// Runs one command line (without the program name). Errors are reported on
/// stderr and mapped to a nonzero exit code.
int run(const std::vector<std::string>& args);

}  // namespace ddp::cli
