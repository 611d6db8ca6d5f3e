#pragma once

#include <iosfwd>

namespace reqlens {

// Entry point of the reqlens command line. Exit codes: 0 success, 1 the
// requested operation failed, 2 bad configuration, arguments or input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reqlens
