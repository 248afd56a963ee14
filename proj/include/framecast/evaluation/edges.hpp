// Copyright 2026 The framecast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/errors.hpp"
#include "framecast/frame.hpp"

namespace framecast {

/// Canny parameters. `low` and `high` are hysteresis thresholds on the
/// gradient magnitude normalized by its maximum over the frame, so they lie in
/// [0,1] and do not depend on image contrast.
struct CannySettings {
  double low = 0.1;
  double high = 0.2;
  double sigma = 1.4;
  int dilation = 11;

  void validate() const {
    if (!(low >= 0.0 && low < high && high <= 1.0)) throw ConfigError("canny thresholds need 0 <= low < high <= 1");
    if (!(sigma > 0.0)) throw ConfigError("canny sigma must be positive");
    if (dilation < 0) throw ConfigError("dilation must be >= 0");
  }

  friend bool operator==(const CannySettings&, const CannySettings&) = default;
};

inline void to_json(nlohmann::json& j, const CannySettings& s) {
  j = nlohmann::json{{"canny_low", s.low}, {"canny_high", s.high}, {"canny_sigma", s.sigma}, {"dilation", s.dilation}};
}

/// Binary evaluation mask, row-major.
struct EvalMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
  std::size_t positive_count = 0;

  bool empty() const noexcept { return positive_count == 0; }
  bool at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c] != 0; }

  friend bool operator==(const EvalMask&, const EvalMask&) = default;
};

namespace detail {

using Grid = std::vector<double>;

inline Grid gaussian_blur(const Frame& f, double sigma) {
  const int h = f.height(), w = f.width();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  for (double& v : k) v /= sum;
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  Grid tmp(static_cast<std::size_t>(h) * w), out(tmp.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * f(r, clampi(c + i, w));
      tmp[static_cast<std::size_t>(r) * w + c] = acc;
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp[static_cast<std::size_t>(clampi(r + i, h)) * w + c];
      out[static_cast<std::size_t>(r) * w + c] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Canny edges: Gaussian smoothing (replicated border), Sobel gradients
/// normalized by their maximum, non-maximum suppression over four directions,
/// and 8-connected hysteresis. A frame without any gradient has no edges.
inline EvalMask canny_edges(const Frame& f, const CannySettings& s) {
  s.validate();
  const int h = f.height(), w = f.width();
  const auto g = detail::gaussian_blur(f, s.sigma);
  auto at = [&](int r, int c) {
    return g[static_cast<std::size_t>(std::clamp(r, 0, h - 1)) * w + std::clamp(c, 0, w - 1)];
  };
  detail::Grid mag(g.size());
  std::vector<std::uint8_t> dir(g.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1) - at(r - 1, c - 1) -
                         2 * at(r, c - 1) - at(r + 1, c - 1)) / 8.0;
      const double gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1) - at(r - 1, c - 1) -
                         2 * at(r - 1, c) - at(r - 1, c + 1)) / 8.0;
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      mag[i] = std::hypot(gx, gy);
      double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
      if (angle < 0) angle += 180.0;
      dir[i] = angle < 22.5 || angle >= 157.5 ? 0 : angle < 67.5 ? 1 : angle < 112.5 ? 2 : 3;
    }
  }
  // Thresholds are fractions of the strongest gradient in the frame.
  const double peak = *std::max_element(mag.begin(), mag.end());
  if (!(peak > 1e-12)) return EvalMask{h, w, std::vector<std::uint8_t>(g.size(), 0), 0};
  for (double& m : mag) m /= peak;
  // Neighbour offsets (dr, dc) along the gradient for each direction bin.
  static constexpr std::array<std::array<int, 2>, 4> step{{{0, 1}, {1, 1}, {1, 0}, {1, -1}}};
  auto mag_at = [&](int r, int c) {
    return r < 0 || r >= h || c < 0 || c >= w ? 0.0 : mag[static_cast<std::size_t>(r) * w + c];
  };
  std::vector<std::uint8_t> state(g.size(), 0);  // 0 none, 1 weak, 2 strong
  std::vector<std::size_t> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const double m = mag[i];
      if (m < s.low || m == 0.0) continue;
      const auto [dr, dc] = step[dir[i]];
      // Ties on a plateau go to the pixel on the negative side.
      if (!(m >= mag_at(r + dr, c + dc) && m > mag_at(r - dr, c - dc))) continue;
      state[i] = m >= s.high ? 2 : 1;
      if (state[i] == 2) stack.push_back(i);
    }
  }
  EvalMask out{h, w, std::vector<std::uint8_t>(g.size(), 0), 0};
  for (std::size_t i : stack) out.pixels[i] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int r = static_cast<int>(i / w), c = static_cast<int>(i % w);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
        if (state[j] == 1 && !out.pixels[j]) {
          out.pixels[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  out.positive_count = static_cast<std::size_t>(std::count(out.pixels.begin(), out.pixels.end(), 1));
  return out;
}

/// Morphological dilation with a square element of side `side`. For even
/// sides the element extends one pixel further towards negative offsets.
inline EvalMask dilate(const EvalMask& m, int side) {
  if (side < 0) throw ConfigError("dilation must be >= 0");
  if (side <= 1) return m;
  const int lo = -(side / 2), hi = lo + side - 1;
  EvalMask out{m.height, m.width, std::vector<std::uint8_t>(m.pixels.size(), 0), 0};
  // Separable: a square element is a row pass followed by a column pass.
  std::vector<std::uint8_t> rows(m.pixels.size(), 0);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (!m.at(r, c)) continue;
      for (int d = std::max(0, c + lo); d <= std::min(m.width - 1, c + hi); ++d) rows[static_cast<std::size_t>(r) * m.width + d] = 1;
    }
  }
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (!rows[static_cast<std::size_t>(r) * m.width + c]) continue;
      for (int d = std::max(0, r + lo); d <= std::min(m.height - 1, r + hi); ++d) out.pixels[static_cast<std::size_t>(d) * m.width + c] = 1;
    }
  }
  out.positive_count = static_cast<std::size_t>(std::count(out.pixels.begin(), out.pixels.end(), 1));
  return out;
}

/// Dilated Canny edges of a groundtruth frame; may be empty.
inline EvalMask edge_mask(const Frame& groundtruth, const CannySettings& s = {}) {
  return dilate(canny_edges(groundtruth, s), s.dilation);
}

/// Mean squared difference over mask-positive pixels.
inline double masked_mse(const Frame& groundtruth, const Frame& predicted, const EvalMask& mask) {
  if (!groundtruth.same_shape(predicted) || mask.height != groundtruth.height() || mask.width != groundtruth.width()) {
    throw ShapeError("masked_mse: groundtruth, prediction and mask must share resolution");
  }
  if (mask.empty()) throw EmptyMaskError("masked_mse: empty mask");
  double sum = 0.0;
  const auto g = groundtruth.pixels();
  const auto p = predicted.pixels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask.pixels[i]) continue;
    const double d = static_cast<double>(g[i]) - static_cast<double>(p[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(mask.positive_count);
}

}  // namespace framecast
