#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kscert {

/// Runs the command-line front end. `args` excludes the program name.
/// Exit codes: 0 success/PASS, 1 certificate not PASS, 2 invalid input,
/// 3 enumeration budget exceeded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kscert
