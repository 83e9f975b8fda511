#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnpbif::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kNoSolution = 3,
  kConjectureFailure = 4,
};

/// Runs one command line (without the program name). Normal output goes to
/// `out` unless an --output file is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `--config FILE` into `--key=value` arguments for every key not
/// already given on the command line. Throws ParseError on a malformed file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace pnpbif::cli
