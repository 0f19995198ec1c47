// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef UNITAIL_CANONICAL_JSON_HPP_
#define UNITAIL_CANONICAL_JSON_HPP_

#include <string>

#include "json.hpp"

namespace unitail::io {

// Deterministic serialisation for golden files: keys sorted, floating
// point values printed with 6 significant digits, two-space indentation,
// trailing newline.
std::string dump_canonical(const nlohmann::json& value);

// Formats one double the same way dump_canonical does.
std::string format_number(double v);

}  // namespace unitail::io

#endif  // UNITAIL_CANONICAL_JSON_HPP_
