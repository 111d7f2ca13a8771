#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dialogic/error.hpp"

namespace dialogic::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kUncodedTurns = 3,
  kBackendUnavailable = 4,
  kPartialCoding = 5,
  kUniverseMismatch = 6,
};

ExitCode exit_code_for(ErrorKind kind);

// Runs one command line (without the program name). Diagnostics go to `err`,
// command output that is not written to files goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dialogic::cli
