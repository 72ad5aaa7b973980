#pragma once

#include <string>
#include <vector>

namespace ouc::cli {

// Entry point shared by the ouc binary and the CLI tests.
// Exit codes: 0 success, 1 usage/config errors, 2 failed verification checks.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

}  // namespace ouc::cli
