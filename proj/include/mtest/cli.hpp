#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtest {

/// Runs the command line tool with args[0] as the program name.
/// Returns 0 on success or accept, 1 when `test` rejects, 2 on usage or IO
/// errors. Primary output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtest
