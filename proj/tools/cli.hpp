#pragma once

#include <ostream>

namespace glmmsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the glmmsel tool. Errors are reported on `err` as a single
/// line `error: <Category>: <message>`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace glmmsel::cli
