#pragma once

#include <string>
#include <vector>

namespace pulsesynth::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

// Parses argv and runs one subcommand; never throws.
int run(int argc, char** argv);

}  // namespace pulsesynth::cli
