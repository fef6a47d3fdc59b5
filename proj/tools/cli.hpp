#pragma once

#include <iosfwd>

namespace qjm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitSampler = 3;

/// Entry point behind the qjm binary. Subcommands: fit, simulate, summarize.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qjm::cli
