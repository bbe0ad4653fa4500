#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cotrep::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDegenerate = 3,
  kBackendFailure = 4,
};

// Runs one command line (args[0] is the program name). Normal output goes to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cotrep::cli
