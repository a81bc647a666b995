//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_TOOLS_COMMANDS_H_
#define SOLVFLOW_TOOLS_COMMANDS_H_

#include <iosfwd>

namespace solvflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses argv and runs one subcommand: fingerprint, validate, train,
// predict, benchmark or ablate.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace solvflow::cli

#endif  // SOLVFLOW_TOOLS_COMMANDS_H_
