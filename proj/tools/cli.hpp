#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abstain::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kVerificationFailure = 2,
  kIoError = 3,
};

/// Entry point for the `abstain` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abstain::cli
