#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace engdiv::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kSolverFailure = 4,
  kVerificationFailed = 5,
};

/// Runs one subcommand (gen, ingest, solve, frontier, simulate, verify).
/// Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace engdiv::cli
