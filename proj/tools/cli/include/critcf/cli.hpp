#pragma once

#include <iosfwd>

#include "critcf/verify.hpp"

namespace critcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 4;

// Test seams; production runs use the defaults.
struct Hooks {
  verify::RhsFunction fft_override;  // replaces the fft path in bench
};

// Parses argv (subcommand first), runs it and writes its outputs plus
// metadata.json into the output directory. Returns the exit code.
int run(int argc, const char* const* argv, const Hooks& hooks, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace critcf::cli
