#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparse_minimax::cli {

/// Exit codes: 0 pass, 1 usage or config error, 2 a failed check or a replay
/// mismatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sparse_minimax::cli
