#pragma once

#include <string>
#include <vector>

namespace clinev {

// Entry point behind the clinev binary. args excludes the program name.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
int run_cli(const std::vector<std::string>& args);

}  // namespace clinev
