#pragma once

#include <ostream>

namespace capplan::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolations = 1;  // check: plan rejected
inline constexpr int kNoPlan = 2;
inline constexpr int kSolverError = 3;
inline constexpr int kUsage = 64;
inline constexpr int kInvalidModel = 65;
inline constexpr int kIoError = 66;

/// Runs one command line (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capplan::cli
