#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iscs::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,
    kExitIntegrity = 3,
    kExitInternal = 4,
};

/// Runs one command line (without the program name). Never throws; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shell-style pattern match supporting '*' and '?'.
bool glob_match(const std::string& pattern, const std::string& text);

} // namespace iscs::cli
