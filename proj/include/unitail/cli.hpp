// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Results go to `out` as canonical JSON (or a
// table where offered), diagnostics to `err`.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
// malformed input, inconsistent datasets).

#ifndef UNITAIL_CLI_HPP_
#define UNITAIL_CLI_HPP_

#include <ostream>

namespace unitail::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unitail::cli

#endif  // UNITAIL_CLI_HPP_
