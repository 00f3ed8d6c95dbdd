#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crossfake {

/// Entry point of the `crossfake` tool. Returns the process exit code:
/// 0 success, 1 validation failure, 2 configuration error, 3 external
/// service failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with argv[0] supplied.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crossfake
