#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fhlse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    ///< bad arguments or domain violations
inline constexpr int kExitRuntime = 3;  ///< I/O failures, timeouts, numerical failures

/// Environment variable naming the default output root (fallback: ./runs).
inline constexpr const char* kOutputRootEnv = "FHLSE_OUTPUT_ROOT";

/// `args` excludes the program name. Errors go to `err` as `error: ...` lines.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fhlse::cli
