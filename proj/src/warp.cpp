// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/warp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unitail/error.hpp"

namespace unitail::geometry {

RgbImage::RgbImage(int w, int h) : width(w), height(h) {
  if (w < 0 || h < 0) throw ParameterError("image size must be non-negative");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
}

RgbImage warp_image(std::span<const std::uint8_t> src, int width, int height,
                    const Homography& h, int out_w, int out_h) {
  if (width < 0 || height < 0 ||
      src.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw FormatError("RGB buffer holds " + std::to_string(src.size()) + " bytes, expected " +
                      std::to_string(static_cast<long long>(width) * height * 3));
  }
  if (out_w <= 0 || out_h <= 0) throw ParameterError("output size must be positive");

  const Homography inv = h.inverse();
  RgbImage out(out_w, out_h);
  auto sample = [&](int x, int y, int c) -> double {
    if (x < 0 || y < 0 || x >= width || y >= height) return 0.0;
    return src[3 * (static_cast<std::size_t>(y) * width + x) + static_cast<std::size_t>(c)];
  };

  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Point2D s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
      if (s.x <= -1.0 || s.y <= -1.0 || s.x >= width || s.y >= height) continue;
      const double fx0 = std::floor(s.x);
      const double fy0 = std::floor(s.y);
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = s.x - fx0;
      const double ay = s.y - fy0;
      std::uint8_t* dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - ax) * sample(x0, y0, c) + ax * sample(x0 + 1, y0, c);
        const double bottom = (1.0 - ax) * sample(x0, y0 + 1, c) + ax * sample(x0 + 1, y0 + 1, c);
        const double v = (1.0 - ay) * top + ay * bottom;
        dst[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace unitail::geometry
