#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uikf {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,     ///< usage or config schema violation
  kExitEstimator = 2,  ///< estimator failure or failed check
  kExitIo = 3,
};

/// Entry point of the `uikf` tool; args excludes the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace uikf
