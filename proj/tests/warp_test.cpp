// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/warp.hpp"

#include <gtest/gtest.h>

#include <random>

#include "unitail/error.hpp"

namespace unitail::geometry {
namespace {

std::vector<std::uint8_t> random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h * 3));
  for (auto& b : px) b = static_cast<std::uint8_t>(byte(rng));
  return px;
}

TEST(WarpImage, IdentityIsByteIdentical) {
  const auto src = random_image(7, 5, 1);
  const RgbImage out = warp_image(src, 7, 5, Homography::identity(), 7, 5);
  EXPECT_EQ(out.pixels, src);
}

TEST(WarpImage, IntegerTranslationShifts) {
  const int w = 6, h = 4;
  const auto src = random_image(w, h, 2);
  const RgbImage out = warp_image(src, w, h, Homography::translation(2, 1), w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int sx = x - 2, sy = y - 1;
        const std::uint8_t want =
            (sx < 0 || sy < 0) ? 0 : src[static_cast<std::size_t>(3 * (sy * w + sx) + c)];
        EXPECT_EQ(out.at(x, y)[c], want) << x << "," << y;
      }
    }
  }
}

TEST(WarpImage, QuarterTurnOfTwoColourPattern) {
  // Left half red, right half blue.
  std::vector<std::uint8_t> src(4 * 4 * 3, 0);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) src[static_cast<std::size_t>(3 * (y * 4 + x) + (x < 2 ? 0 : 2))] = 255;
  }
  // (x, y) -> (3 - y, x): a clockwise quarter turn on screen.
  Homography h;
  h.m = {0, -1, 3, 1, 0, 0, 0, 0, 1};
  const RgbImage out = warp_image(src, 4, 4, h, 4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const std::uint8_t* p = out.at(x, y);
      EXPECT_EQ(p[0], y < 2 ? 255 : 0) << x << "," << y;
      EXPECT_EQ(p[1], 0);
      EXPECT_EQ(p[2], y < 2 ? 0 : 255) << x << "," << y;
    }
  }
}

TEST(WarpImage, HalfPixelShiftAveragesNeighbours) {
  const std::vector<std::uint8_t> src = {0, 0, 0, 200, 100, 50};  // 2x1
  const RgbImage out = warp_image(src, 2, 1, Homography::translation(-0.5, 0), 1, 1);
  EXPECT_EQ(out.at(0, 0)[0], 100);
  EXPECT_EQ(out.at(0, 0)[1], 50);
  EXPECT_EQ(out.at(0, 0)[2], 25);
}

TEST(WarpImage, OutOfBoundsIsBlack) {
  const auto src = random_image(3, 3, 3);
  const RgbImage out = warp_image(src, 3, 3, Homography::translation(100, 100), 3, 3);
  for (auto b : out.pixels) EXPECT_EQ(b, 0);
}

TEST(WarpImage, BufferSizeMismatchThrows) {
  const std::vector<std::uint8_t> src(10, 0);
  EXPECT_THROW(warp_image(src, 2, 2, Homography::identity(), 2, 2), FormatError);
}

}  // namespace
}  // namespace unitail::geometry
