#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace servosys {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

/// Runs the command line tool. args excludes the program name. Every run
/// prints exactly one JSON summary line to out on success.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace servosys
