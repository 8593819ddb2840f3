#pragma once

#include <iosfwd>

namespace heterorep {

// Exit codes: 0 success, 1 data/runtime error or flagged analysis records,
// 2 usage or configuration error.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace heterorep
