#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mopdil {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Subcommands: fit, infer, eval, ablate, sweep-q, synth. args excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mopdil
