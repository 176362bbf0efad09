#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ccpd::cli {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

// Runs the tool on `args` (without the program name). Output goes to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccpd::cli
