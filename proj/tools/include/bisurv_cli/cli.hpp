#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bisurv::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,          // bad flags, unreadable or malformed input, invalid config
  kAssumption = 2,     // validation block, insufficient data, degenerate variance
  kInternal = 3,
};

/// Runs one command line (args exclude the program name). Results go to
/// `out`, diagnostics to `err`; `in` is read when the input path is "-".
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace bisurv::cli
