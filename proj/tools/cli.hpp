#pragma once

#include <iosfwd>

namespace frnet::cli {

// Runs the `frnet` command line. Returns 0 on success, 2 on usage errors and
// 1 on runtime errors; errors are written to `err` prefixed with `error:`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frnet::cli
