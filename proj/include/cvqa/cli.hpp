#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvqa {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitData = 3,
    kExitNotFound = 4,
    kExitGenerator = 5,
    kExitDetector = 6,
    kExitIo = 7,
};

/// Runs one subcommand; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvqa
