#pragma once

#include <iosfwd>

namespace perturbopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitDivergence = 2;

/// Entry point of the `perturbopt` tool. Never throws; maps validation
/// failures to 1 and numeric divergence to 2.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace perturbopt::cli
