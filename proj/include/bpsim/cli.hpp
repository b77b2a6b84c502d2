#pragma once

#include <string>
#include <vector>

namespace bpsim {

inline constexpr const char* kToolVersion = "0.1.0";

// Parse and execute one command; args exclude the program name. Returns the
// process exit code: 0 success, 1 config error, 2 runtime/invariant error.
int run_command(const std::vector<std::string>& args);

}  // namespace bpsim
