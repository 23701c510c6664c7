#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ladder::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitComputationFailed = 3;

/// Runs the `ladderspec` command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ladder::cli
