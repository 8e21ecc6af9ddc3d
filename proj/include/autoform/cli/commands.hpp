#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace autoform::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailed = 2;
inline constexpr int kExitCheckFailed = 3;

// Entry point of the autoform tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace autoform::cli
