#pragma once

#include <string>
#include <vector>

namespace dtwc {

// argv-style arguments without the program name. Returns the process exit
// code: 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args);

} // namespace dtwc
