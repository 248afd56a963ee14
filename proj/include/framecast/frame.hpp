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
#include <span>
#include <string>
#include <vector>

#include "framecast/errors.hpp"

namespace framecast {

/// Grayscale image with intensities in [0,1], stored row-major.
class Frame {
 public:
  Frame() = default;

  Frame(int height, int width, float value = 0.0f) : height_(height), width_(width) {
    check_dims(height, width);
    check_value(value);
    pixels_.assign(static_cast<std::size_t>(height) * width, value);
  }

  Frame(int height, int width, std::vector<float> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    check_dims(height, width);
    if (pixels_.size() != static_cast<std::size_t>(height) * width) {
      throw ShapeError("frame pixel count " + std::to_string(pixels_.size()) + " does not match " +
                       std::to_string(height) + "x" + std::to_string(width));
    }
    for (float v : pixels_) check_value(v);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  float operator()(int row, int col) const { return pixels_[index(row, col)]; }

  /// Writes one pixel; the value must lie in [0,1].
  void set(int row, int col, float value) {
    check_value(value);
    pixels_[index(row, col)] = value;
  }

  std::span<const float> pixels() const noexcept { return pixels_; }

  bool same_shape(const Frame& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  static void check_dims(int height, int width) {
    if (height <= 0 || width <= 0) {
      throw ShapeError("frame dimensions must be positive, got " + std::to_string(height) + "x" +
                       std::to_string(width));
    }
  }

  static void check_value(float v) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw DomainError("pixel intensity " + std::to_string(v) + " outside [0,1]");
    }
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> pixels_;
};

/// Positive time offset, in milliseconds, from the input frame to the predicted one.
class TemporalDisplacement {
 public:
  explicit TemporalDisplacement(double millis) : millis_(millis) {
    if (!(millis > 0.0) || !std::isfinite(millis)) {
      throw DomainError("temporal displacement must be positive and finite, got " +
                        std::to_string(millis) + " ms");
    }
  }

  double millis() const noexcept { return millis_; }

  friend bool operator==(const TemporalDisplacement&, const TemporalDisplacement&) = default;

 private:
  double millis_;
};

}  // namespace framecast
