#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fpsi {

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_numerical = 1, exit_usage = 2 };

/// Runs the `fpsi` command line; args excludes the program name. Artifacts
/// go to the output directory, progress to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fpsi
