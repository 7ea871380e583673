#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace cohlab {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInput = 2, kExitNumerical = 3 };

/// Runs `coherency-lab <args...>` (program name excluded) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace cohlab
