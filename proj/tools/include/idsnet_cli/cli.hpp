#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idsnet::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitCompatibility = 4,
};

// Runs one invocation. args[0] is the program name. Library errors are
// caught here and mapped to exit codes; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idsnet::cli
