#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssae::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code: 0 on success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssae::cli
