#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerification = 2;

/// Parses `args` (without the program name) and runs the selected command.
/// Human-readable progress goes to `out`, diagnostics to `err`; result files
/// are written under --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmab::cli
