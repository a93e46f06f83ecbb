#pragma once

#include <iosfwd>

namespace reinforce {

/// Exit codes of the command line tool.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_regime = 4 };

/// Entry point of the `reinforce` tool: subcommands coefficients, cell-verify,
/// solve, compare and regimes. Messages go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace reinforce
