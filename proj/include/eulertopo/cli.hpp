#pragma once

#include <string>
#include <vector>

namespace eulertopo::cli {

// Exit codes: 0 ok, 2 config error, 3 numerical failure.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace eulertopo::cli
