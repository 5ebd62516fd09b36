#pragma once

#include <string>
#include <vector>

namespace supbench::cli {

// Parses and executes one CLI invocation (argv without the program name).
// Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
int run_command(const std::vector<std::string>& args);

}  // namespace supbench::cli
