#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmmar::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 2,
    kIoFailure = 3,
    kFitFailure = 4,
    kUnsupportedOrder = 5,
    kOracleFailure = 6,
};

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmmar::cli
