#pragma once

#include <iosfwd>

namespace relchain {

/// Exit status: 0 success, 1 usage error, 2 data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace relchain
