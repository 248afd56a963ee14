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
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/errors.hpp"
#include "framecast/frame.hpp"
#include "framecast/model/parameters.hpp"

namespace framecast {

inline constexpr int kRawWidth = 160;
inline constexpr int kRawHeight = 120;
inline constexpr int kCropWidth = 120;
inline constexpr int kCropOffset = (kRawWidth - kCropWidth) / 2;

/// Central 120-pixel-wide crop of a 160x120 source frame. Anything else,
/// including an already-cropped frame, is rejected.
inline Frame preprocess_frame(const Frame& raw) {
  if (raw.width() != kRawWidth || raw.height() != kRawHeight) {
    throw IngestError("expected a 160x120 (width x height) source frame, got " + std::to_string(raw.width()) +
                      "x" + std::to_string(raw.height()));
  }
  std::vector<float> px;
  px.reserve(static_cast<std::size_t>(kRawHeight) * kCropWidth);
  for (int r = 0; r < kRawHeight; ++r) {
    for (int c = kCropOffset; c < kCropOffset + kCropWidth; ++c) px.push_back(raw(r, c));
  }
  return Frame(kRawHeight, kCropWidth, std::move(px));
}

/// Timestamp of a frame in milliseconds.
inline double frame_time(int frame_index, double fps) {
  if (frame_index < 0) throw DomainError("frame index must be non-negative");
  if (!(fps > 0.0)) throw DomainError("fps must be positive");
  return frame_index * 1000.0 / fps;
}

/// Actor-disjoint partition of a dataset.
struct SplitSpec {
  std::set<std::string> train_actor_ids;
  std::set<std::string> test_actor_ids;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  bool is_train(const std::string& actor) const { return train_actor_ids.contains(actor); }
  bool is_test(const std::string& actor) const { return test_actor_ids.contains(actor); }

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

enum class SplitSide { Train, Test };

/// Seeded shuffle of the sorted actor ids; the first round(f * n) go to
/// training, clamped so both sides keep at least one actor.
inline SplitSpec make_split(const std::vector<std::string>& actor_ids, double train_fraction, std::uint64_t seed) {
  std::vector<std::string> ids(actor_ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw SplitError("an actor split needs at least 2 distinct actors");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw SplitError("train_fraction must lie in (0,1)");
  std::mt19937_64 rng(mix_seed(seed, 0x5b117));
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(ids[i], ids[j]);
  }
  const auto n = static_cast<long>(ids.size());
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
  SplitSpec split;
  split.train_fraction = train_fraction;
  split.seed = seed;
  split.train_actor_ids.insert(ids.begin(), ids.begin() + n_train);
  split.test_actor_ids.insert(ids.begin() + n_train, ids.end());
  return split;
}

inline void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{{"train_actor_ids", s.train_actor_ids},
                     {"test_actor_ids", s.test_actor_ids},
                     {"train_fraction", s.train_fraction},
                     {"seed", s.seed}};
}

}  // namespace framecast
