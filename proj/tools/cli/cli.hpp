#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zncount::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSemantic = 1;
inline constexpr int kExitInput = 2;

/// Runs one command. args excludes the program name. Reports go to out,
/// diagnostics to err. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zncount::cli
