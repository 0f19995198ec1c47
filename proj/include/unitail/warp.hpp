// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef UNITAIL_WARP_HPP_
#define UNITAIL_WARP_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "unitail/geometry.hpp"

namespace unitail::geometry {

// Tightly packed, row-major, 8-bit RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  // Black image. Throws ParameterError on negative sizes.
  RgbImage(int w, int h);

  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

// Resamples `src` through the forward transform `h` (source -> output).
// Output pixel (x, y) takes the bilinear sample of `src` at h^-1(x, y), with
// integer coordinates addressing pixel centres; neighbours outside the
// source contribute black.
// Throws FormatError when src.size() != width * height * 3.
RgbImage warp_image(std::span<const std::uint8_t> src, int width, int height,
                    const Homography& h, int out_w, int out_h);

}  // namespace unitail::geometry

#endif  // UNITAIL_WARP_HPP_
