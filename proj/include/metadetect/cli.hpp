#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metadetect {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAdversarial = 2;

/// Build identifier printed by --version.
std::string version_string();

/// Runs one CLI invocation. args excludes the program name. Verdict lines go
/// to `out`; logs, usage and errors go to `err`.
/// Exit codes: 0 success (or Clean for detect), 2 Adversarial (detect only),
/// 1 any error including unknown subcommands and flags.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, const char* const* argv);

}  // namespace metadetect
