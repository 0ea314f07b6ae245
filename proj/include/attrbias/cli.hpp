#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace attrbias {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: audit, correlate, synth, inspect. Failures print one JSON
// object {"error": <code>, "message": <text>} on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace attrbias
