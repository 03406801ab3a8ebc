#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace endgame {

/// Command-line entry point. Exit codes: 0 success, 1 runtime failure or
/// failed cells, 2 usage errors (unknown flags, bad values).
int cli_main(int argc, char** argv);

/// Same, for tests: `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace endgame
