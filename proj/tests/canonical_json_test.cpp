// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/canonical_json.hpp"

#include <gtest/gtest.h>

namespace unitail::io {
namespace {

using nlohmann::json;

TEST(CanonicalJson, SortedKeysAndIndent) {
  json v;
  v["zeta"] = 1;
  v["alpha"] = json::object({{"b", true}, {"a", "x"}});
  v["mid"] = json::array({1, 2.5});
  EXPECT_EQ(dump_canonical(v),
            "{\n"
            "  \"alpha\": {\n"
            "    \"a\": \"x\",\n"
            "    \"b\": true\n"
            "  },\n"
            "  \"mid\": [1, 2.5],\n"
            "  \"zeta\": 1\n"
            "}\n");
}

TEST(CanonicalJson, NumberFormatting) {
  EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1234567.0), "1.23457e+06");
  EXPECT_EQ(format_number(84.25 / 101), "0.834158");
}

TEST(CanonicalJson, NestedArraysOfObjects) {
  const json v = {{"items", json::array({json::object({{"k", 1}}), json::object()})}};
  EXPECT_EQ(dump_canonical(v),
            "{\n"
            "  \"items\": [\n"
            "    {\n"
            "      \"k\": 1\n"
            "    },\n"
            "    {}\n"
            "  ]\n"
            "}\n");
  EXPECT_EQ(dump_canonical(json::array()), "[]\n");
}

TEST(CanonicalJson, InsertionOrderDoesNotMatter) {
  json a, b;
  a["x"] = 1.0 / 7.0;
  a["y"] = "s";
  b["y"] = "s";
  b["x"] = 1.0 / 7.0;
  EXPECT_EQ(dump_canonical(a), dump_canonical(b));
}

}  // namespace
}  // namespace unitail::io
