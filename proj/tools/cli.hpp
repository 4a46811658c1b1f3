#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace persona::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `persona` invocation. `args` excludes the program name.
/// Returns the process exit code: 0 success, 1 runtime/data error, 2 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace persona::cli
