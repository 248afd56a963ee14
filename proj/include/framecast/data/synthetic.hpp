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
#include <cmath>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "framecast/errors.hpp"
#include "framecast/frame.hpp"

namespace framecast {

enum class ShapeKind { Square, Disk, Bar };
enum class MotionKind { Linear, Oscillating };

inline std::string to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::Square: return "square";
    case ShapeKind::Disk: return "disk";
    case ShapeKind::Bar: return "bar";
  }
  return "?";
}

inline ShapeKind parse_shape(const std::string& s) {
  if (s == "square") return ShapeKind::Square;
  if (s == "disk") return ShapeKind::Disk;
  if (s == "bar") return ShapeKind::Bar;
  throw ConfigError("unknown shape kind '" + s + "' (expected square, disk or bar)");
}

struct Point {
  double x = 0.0;  // column direction
  double y = 0.0;  // row direction
};

/// One synthetic video: a single shape on a flat background. Coordinates are
/// continuous pixel units; pixel (r, c) covers [c, c+1] x [r, r+1].
///
/// `size` is the side of a square, the diameter of a disk, and the height of a
/// vertical bar whose width is size / 4.
struct SyntheticSceneSpec {
  ShapeKind shape = ShapeKind::Square;
  double size = 8.0;
  Point start{32.0, 32.0};
  MotionKind motion = MotionKind::Linear;
  Point velocity{0.0, 0.0};  // px per ms
  double amplitude = 0.0;    // px, oscillating motion
  double period_ms = 0.0;
  Point axis{1.0, 0.0};      // unit direction of oscillation
  float foreground = 1.0f;
  float background = 0.0f;
  double fps = 25.0;
  double duration_ms = 200.0;
  int height = 64;
  int width = 64;

  double half_width() const { return shape == ShapeKind::Bar ? size / 8.0 : size / 2.0; }
  double half_height() const { return size / 2.0; }

  Point center_at(double t_ms) const {
    if (motion == MotionKind::Linear) {
      return {start.x + velocity.x * t_ms, start.y + velocity.y * t_ms};
    }
    // fmod keeps a full period bit-identical to t = 0.
    const double phase = std::fmod(t_ms, period_ms) / period_ms;
    const double s = std::sin(2.0 * std::numbers::pi * phase);
    return {start.x + amplitude * s * axis.x, start.y + amplitude * s * axis.y};
  }

  /// Frames sampled at i * 1000 / fps for every such time below the duration;
  /// a zero-length scene still has its t = 0 frame.
  int frame_count() const {
    const double exact = duration_ms * fps / 1000.0;
    return std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("synthetic scene: " + m); };
    if (height <= 0 || width <= 0) fail("resolution must be positive");
    if (!(size > 0.0)) fail("size must be positive");
    if (!(fps > 0.0)) fail("fps must be positive");
    if (!(duration_ms >= 0.0)) fail("duration must be non-negative");
    if (!(foreground >= 0.0f && foreground <= 1.0f && background >= 0.0f && background <= 1.0f))
      fail("intensities must lie in [0,1]");
    if (foreground == background) fail("foreground and background intensities must differ");
    if (motion == MotionKind::Oscillating) {
      if (!(period_ms > 0.0)) fail("oscillation period must be positive");
      if (!(amplitude >= 0.0)) fail("oscillation amplitude must be non-negative");
      const double norm = std::hypot(axis.x, axis.y);
      if (std::abs(norm - 1.0) > 1e-9) fail("oscillation axis must be a unit vector");
    }
    // Linear paths are extremal at their endpoints; oscillations at +-amplitude.
    auto check_inside = [&](Point c, const char* when) {
      const double eps = 1e-9;
      if (c.x - half_width() < -eps || c.x + half_width() > width + eps || c.y - half_height() < -eps ||
          c.y + half_height() > height + eps) {
        fail(std::string("shape leaves the frame ") + when);
      }
    };
    if (motion == MotionKind::Linear) {
      check_inside(center_at(0.0), "at t = 0");
      check_inside(center_at(duration_ms), "before the end of the scene");
    } else {
      check_inside({start.x + amplitude * axis.x, start.y + amplitude * axis.y}, "at peak excursion");
      check_inside({start.x - amplitude * axis.x, start.y - amplitude * axis.y}, "at peak excursion");
    }
  }
};

namespace detail {

inline double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Integral of sqrt(r^2 - s^2) for s from 0 to x, with x clamped to [-r, r].
inline double circle_primitive(double x, double r) {
  x = std::clamp(x, -r, r);
  return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(x / r));
}

/// Area of the origin-centred disk of radius r intersected with {X <= x, Y <= y}.
inline double disk_quadrant_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  const double a = -r;
  const double b = std::min(x, r);
  const double half = circle_primitive(b, r) - circle_primitive(a, r);
  if (y >= r) return 2.0 * half;
  // Column at X spans Y in [-h, clamp(y, -h, h)], h = sqrt(r^2 - X^2).
  const double w = std::sqrt(r * r - y * y);
  const double inner = y * overlap(a, b, -w, w);
  double outer = 0.0;
  if (b > -w) {
    outer += circle_primitive(std::min(b, -w), r) - circle_primitive(a, r);
  } else {
    outer += circle_primitive(b, r) - circle_primitive(a, r);
  }
  if (b > w) outer += circle_primitive(b, r) - circle_primitive(w, r);
  const double sign = y >= 0.0 ? 1.0 : -1.0;
  return half + inner + sign * outer;
}

inline double disk_pixel_coverage(double x0, double x1, double y0, double y1, double r) {
  const double area = disk_quadrant_area(x1, y1, r) - disk_quadrant_area(x0, y1, r) -
                      disk_quadrant_area(x1, y0, r) + disk_quadrant_area(x0, y0, r);
  return std::clamp(area, 0.0, 1.0);
}

}  // namespace detail

/// Analytic rendering with exact area coverage at the shape boundary.
inline Frame render_synthetic(const SyntheticSceneSpec& spec, double t_ms) {
  spec.validate();
  if (!(t_ms >= 0.0 && t_ms <= spec.duration_ms)) {
    throw DomainError("render time " + std::to_string(t_ms) + " ms outside [0, " +
                      std::to_string(spec.duration_ms) + "]");
  }
  const Point c = spec.center_at(t_ms);
  const double contrast = static_cast<double>(spec.foreground) - spec.background;
  std::vector<float> px(static_cast<std::size_t>(spec.height) * spec.width);
  for (int r = 0; r < spec.height; ++r) {
    for (int col = 0; col < spec.width; ++col) {
      double cov;
      if (spec.shape == ShapeKind::Disk) {
        const double radius = spec.size / 2.0;
        cov = detail::disk_pixel_coverage(col - c.x, col + 1 - c.x, r - c.y, r + 1 - c.y, radius);
      } else {
        cov = detail::overlap(col, col + 1, c.x - spec.half_width(), c.x + spec.half_width()) *
              detail::overlap(r, r + 1, c.y - spec.half_height(), c.y + spec.half_height());
      }
      const double v = spec.background + contrast * cov;
      px[static_cast<std::size_t>(r) * spec.width + col] = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
    }
  }
  return Frame(spec.height, spec.width, std::move(px));
}

inline void to_json(nlohmann::json& j, const SyntheticSceneSpec& s) {
  j = nlohmann::json{{"shape", to_string(s.shape)},
                     {"size", s.size},
                     {"start", {s.start.x, s.start.y}},
                     {"foreground", s.foreground},
                     {"background", s.background},
                     {"fps", s.fps},
                     {"duration_ms", s.duration_ms},
                     {"resolution", {s.height, s.width}}};
  if (s.motion == MotionKind::Linear) {
    j["motion"] = {{"kind", "linear"}, {"velocity", {s.velocity.x, s.velocity.y}}};
  } else {
    j["motion"] = {{"kind", "oscillate"},
                   {"amplitude", s.amplitude},
                   {"period_ms", s.period_ms},
                   {"axis", {s.axis.x, s.axis.y}}};
  }
}

inline void from_json(const nlohmann::json& j, SyntheticSceneSpec& s) {
  s.shape = parse_shape(j.at("shape").get<std::string>());
  s.size = j.at("size").get<double>();
  s.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
  s.foreground = j.value("foreground", 1.0f);
  s.background = j.value("background", 0.0f);
  s.fps = j.value("fps", 25.0);
  s.duration_ms = j.at("duration_ms").get<double>();
  s.height = j.at("resolution").at(0).get<int>();
  s.width = j.at("resolution").at(1).get<int>();
  const auto& m = j.at("motion");
  const auto kind = m.at("kind").get<std::string>();
  if (kind == "linear") {
    s.motion = MotionKind::Linear;
    s.velocity = {m.at("velocity").at(0).get<double>(), m.at("velocity").at(1).get<double>()};
  } else if (kind == "oscillate") {
    s.motion = MotionKind::Oscillating;
    s.amplitude = m.at("amplitude").get<double>();
    s.period_ms = m.at("period_ms").get<double>();
    s.axis = {m.at("axis").at(0).get<double>(), m.at("axis").at(1).get<double>()};
  } else {
    throw ConfigError("unknown motion kind '" + kind + "'");
  }
}

}  // namespace framecast
