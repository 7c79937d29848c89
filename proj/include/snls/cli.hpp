#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snls {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFail = 2;
inline constexpr int kExitUsage = 64;

/// Entry point of the snls tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snls
