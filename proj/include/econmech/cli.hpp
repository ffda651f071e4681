#pragma once

// econsim command dispatch. Kept in the library so it can be driven from
// tests without spawning processes.

#include <iosfwd>
#include <string>
#include <vector>

namespace econmech::cli {

enum ExitCode : int { ok = 0, usage_or_parse = 1, runtime = 2, io = 3 };

/// `args` excludes the program name. Errors go to `err` as one line
/// starting with "error: ".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace econmech::cli
