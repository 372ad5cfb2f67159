#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace guru::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 success, 1 data or runtime failure, 2 usage or flag validation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace guru::cli
