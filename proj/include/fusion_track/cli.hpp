#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fusion_track::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

// Subcommands: run, sweep, fogsim, profiles, validate. Returns the process exit code:
// 0 on success, 1 on configuration/usage errors, 2 on numeric runtime errors.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One human-readable line per requirement profile, as printed by `profiles`.
std::vector<std::string> profile_lines();

}  // namespace fusion_track::cli
