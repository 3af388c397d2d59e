#pragma once

#include <iosfwd>

namespace proact {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the `proact` tool. Commands: train, eval, verify,
/// inspect-base, replay.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proact
