#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chopper {

/// Command-line front end. `args` excludes the program name. Returns 0 on
/// success, 1 on a user error (bad flags, malformed input) and 2 on an
/// internal error. Results go to `out` (or the --output file), diagnostics
/// to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace chopper
