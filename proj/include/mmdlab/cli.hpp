#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmdlab {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

/// Parses `args` (without the program name), runs the subcommand and returns
/// its exit code. Results go to `out` unless --out names a file; diagnostics
/// go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmdlab
