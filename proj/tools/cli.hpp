#pragma once

#include <string>
#include <vector>

namespace aabtp::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args);

// Reads `key = value` lines ('#' starts a comment) and returns them as
// "--key=value" arguments; underscores in keys become dashes.
std::vector<std::string> config_arguments(const std::string& path);

}  // namespace aabtp::cli
