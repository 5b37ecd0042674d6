// Command-line front end. Exit codes: 0 success, 1 validation error,
// 2 numerical failure, 3 property failure (deadline, certificate, sweep check).
#pragma once

#include <ostream>

namespace tbarrier::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kNumerics = 2, kPropertyFailure = 3 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tbarrier::cli
