// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOUNDTRIAGE_CLI_H_
#define SOUNDTRIAGE_CLI_H_

#include <ostream>

namespace soundtriage {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the command-line tool. Commands: synth, train, infer, eval,
/// sweep, tune. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace soundtriage

#endif  // SOUNDTRIAGE_CLI_H_
