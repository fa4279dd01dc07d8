#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcekit {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

/// Runs the command line `args` (without the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pcekit
