#pragma once

#include <string>
#include <vector>

namespace zfepoch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitProcessing = 1;
inline constexpr int kExitUsage = 2;
// `lock --once` when the decision is Closed.
inline constexpr int kExitClosed = 3;

// args[0] is the program name. Returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace zfepoch::cli
