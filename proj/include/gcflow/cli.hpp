#pragma once

#include <string>
#include <vector>

namespace gcflow {

/// Entry point shared by the gcflow executable and in-process tests.
/// Exit codes: 0 success, 1 usage/validation, 2 numerical failure, 3 I/O.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, const char* const* argv);

}  // namespace gcflow
