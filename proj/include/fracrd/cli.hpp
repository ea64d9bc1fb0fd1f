#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracrd {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand (args excludes the program name). Text that would go
/// to stdout/stderr is written to `out`/`err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fracrd
