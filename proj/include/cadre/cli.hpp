#pragma once

#include <iosfwd>

namespace cadre {

/// Entry point of the `cadre` command-line tool. Results go to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on invalid input, 2 on I/O failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cadre
