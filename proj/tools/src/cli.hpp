#pragma once

#include <iosfwd>

namespace flagwalk::tools {

// Runs the flagwalk command line. Exit codes: 0 success, 1 bad configuration,
// 2 numerical failure (including failed self-checks).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flagwalk::tools
