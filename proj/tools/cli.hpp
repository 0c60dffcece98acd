#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace alin::cli {

enum ExitCode : int { kOptimal = 0, kInputError = 1, kMaxIterations = 2 };

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alin::cli
