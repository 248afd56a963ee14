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
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/errors.hpp"

namespace framecast {

struct Extent {
  int height = 0;
  int width = 0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Architectural hyperparameters of the time-conditioned encoder-decoder.
///
/// Encoder: for every entry of `encoder_channels` one stride-1 convolution
/// (kernel from `encoder_kernel_schedule`) followed by a 2x2 stride-2
/// convolution that halves the resolution; then a final convolution with the
/// last scheduled kernel projecting to `bottleneck_channels`. The flattened
/// bottleneck map is the first encoder fully-connected layer when
/// `flatten_is_first_fc` is set, otherwise a trainable projection onto
/// `encoder_fc_sizes[0]` is inserted.
///
/// Decoder: fully-connected layers back to the bottleneck map, then per stage
/// a stride-2 transpose convolution ("unpooling") and a stride-1 transpose
/// convolution, restoring the encoder's spatial sizes in reverse.
struct ModelConfig {
  int input_height = 120;
  int input_width = 120;
  std::vector<int> encoder_channels{32, 64, 128};
  std::vector<int> encoder_kernel_schedule{5, 5, 2, 1};
  std::vector<int> encoder_fc_sizes{7200, 4096};
  std::vector<int> time_branch_fc_sizes{64, 64, 64, 64};
  std::vector<int> decoder_fc_sizes{4096, 7200};
  std::vector<int> decoder_kernel_schedule{2, 5, 5};
  int bottleneck_channels = 32;
  bool flatten_is_first_fc = true;
  /// Disabled for the iterative baseline, which has no notion of time.
  bool time_branch = true;
  double dropout_keep_probability = 0.8;
  /// Multiplier applied to dt (milliseconds) before it enters the time branch.
  double time_input_scale = 1e-3;
  std::string output_activation = "sigmoid";

  int stages() const { return static_cast<int>(encoder_channels.size()); }

  /// Spatial size after each pooling stage; element 0 is the input resolution.
  std::vector<Extent> spatial_schedule() const {
    std::vector<Extent> sizes{{input_height, input_width}};
    for (int i = 0; i < stages(); ++i) {
      const Extent& prev = sizes.back();
      sizes.push_back({prev.height / 2, prev.width / 2});
    }
    return sizes;
  }

  int flatten_size() const {
    const Extent bottom = spatial_schedule().back();
    return bottleneck_channels * bottom.height * bottom.width;
  }

  int image_embedding_size() const {
    return encoder_fc_sizes.empty() ? flatten_size() : encoder_fc_sizes.back();
  }

  int time_embedding_size() const {
    return time_branch && !time_branch_fc_sizes.empty() ? time_branch_fc_sizes.back() : 0;
  }

  int embedding_size() const { return image_embedding_size() + time_embedding_size(); }

  /// Output channel count of every decoder transpose convolution, coarse to fine.
  std::vector<int> decoder_channels() const {
    std::vector<int> out;
    for (int j = 0; j + 1 < stages(); ++j) out.push_back(encoder_channels[stages() - 2 - j]);
    out.push_back(1);
    return out;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
    auto all_positive = [](const std::vector<int>& v) {
      return std::all_of(v.begin(), v.end(), [](int x) { return x > 0; });
    };
    if (input_height <= 0 || input_width <= 0) fail("input resolution must be positive");
    if (encoder_channels.empty() || !all_positive(encoder_channels))
      fail("encoder_channels must be a non-empty list of positive counts");
    if (static_cast<int>(encoder_kernel_schedule.size()) != stages() + 1)
      fail("encoder_kernel_schedule needs " + std::to_string(stages() + 1) + " entries");
    if (static_cast<int>(decoder_kernel_schedule.size()) != stages())
      fail("decoder_kernel_schedule needs " + std::to_string(stages()) + " entries");
    if (!all_positive(encoder_kernel_schedule) || !all_positive(decoder_kernel_schedule))
      fail("kernel sizes must be positive");
    if (bottleneck_channels <= 0) fail("bottleneck_channels must be positive");
    const Extent bottom = spatial_schedule().back();
    if (bottom.height < 1 || bottom.width < 1)
      fail("input resolution too small for " + std::to_string(stages()) + " pooling stages");
    if (!all_positive(encoder_fc_sizes) || !all_positive(decoder_fc_sizes) ||
        !all_positive(time_branch_fc_sizes))
      fail("fully-connected widths must be positive");
    if (flatten_is_first_fc) {
      if (encoder_fc_sizes.empty() || encoder_fc_sizes.front() != flatten_size())
        fail("encoder_fc_sizes[0] must equal the flattened bottleneck size " +
             std::to_string(flatten_size()));
      if (decoder_fc_sizes.empty() || decoder_fc_sizes.back() != flatten_size())
        fail("decoder_fc_sizes must end at the flattened bottleneck size " +
             std::to_string(flatten_size()));
    }
    if (time_branch && time_branch_fc_sizes.empty()) fail("time branch needs at least one layer");
    if (!(dropout_keep_probability > 0.0 && dropout_keep_probability <= 1.0))
      fail("dropout_keep_probability must lie in (0,1]");
    if (!(time_input_scale > 0.0)) fail("time_input_scale must be positive");
    if (output_activation != "sigmoid") fail("unsupported output_activation '" + output_activation + "'");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Same architecture family at a resolution and width fit for CPU-scale runs.
inline ModelConfig reduced_model_config(int resolution, int base_channels = 4, int fc_width = 128,
                                        int time_width = 16) {
  ModelConfig c;
  c.input_height = resolution;
  c.input_width = resolution;
  c.encoder_channels = {base_channels, 2 * base_channels, 4 * base_channels};
  c.bottleneck_channels = base_channels;
  const int bottom = resolution / 8;
  const int flat = c.bottleneck_channels * bottom * bottom;
  c.encoder_fc_sizes = {flat, fc_width};
  c.time_branch_fc_sizes = {time_width, time_width, time_width, time_width};
  c.decoder_fc_sizes = {fc_width, flat};
  return c;
}

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"input_resolution", {c.input_height, c.input_width}},
                     {"encoder_channels", c.encoder_channels},
                     {"encoder_kernel_schedule", c.encoder_kernel_schedule},
                     {"encoder_fc_sizes", c.encoder_fc_sizes},
                     {"time_branch_fc_sizes", c.time_branch_fc_sizes},
                     {"decoder_fc_sizes", c.decoder_fc_sizes},
                     {"decoder_kernel_schedule", c.decoder_kernel_schedule},
                     {"bottleneck_channels", c.bottleneck_channels},
                     {"flatten_is_first_fc", c.flatten_is_first_fc},
                     {"time_branch", c.time_branch},
                     {"dropout_keep_probability", c.dropout_keep_probability},
                     {"time_input_scale", c.time_input_scale},
                     {"output_activation", c.output_activation},
                     {"embedding_size", c.embedding_size()}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  static const std::set<std::string> known{
      "input_resolution",   "encoder_channels",     "encoder_kernel_schedule",
      "encoder_fc_sizes",   "time_branch_fc_sizes", "decoder_fc_sizes",
      "decoder_kernel_schedule", "bottleneck_channels", "flatten_is_first_fc",
      "time_branch",        "dropout_keep_probability", "time_input_scale",
      "output_activation",  "embedding_size"};
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("model config: unknown field '" + key + "'");
  }
  try {
    if (j.contains("input_resolution")) {
      const auto& r = j.at("input_resolution");
      c.input_height = r.at(0).get<int>();
      c.input_width = r.at(1).get<int>();
    }
    c.encoder_channels = j.value("encoder_channels", c.encoder_channels);
    c.encoder_kernel_schedule = j.value("encoder_kernel_schedule", c.encoder_kernel_schedule);
    c.encoder_fc_sizes = j.value("encoder_fc_sizes", c.encoder_fc_sizes);
    c.time_branch_fc_sizes = j.value("time_branch_fc_sizes", c.time_branch_fc_sizes);
    c.decoder_fc_sizes = j.value("decoder_fc_sizes", c.decoder_fc_sizes);
    c.decoder_kernel_schedule = j.value("decoder_kernel_schedule", c.decoder_kernel_schedule);
    c.bottleneck_channels = j.value("bottleneck_channels", c.bottleneck_channels);
    c.flatten_is_first_fc = j.value("flatten_is_first_fc", c.flatten_is_first_fc);
    c.time_branch = j.value("time_branch", c.time_branch);
    c.dropout_keep_probability = j.value("dropout_keep_probability", c.dropout_keep_probability);
    c.time_input_scale = j.value("time_input_scale", c.time_input_scale);
    c.output_activation = j.value("output_activation", c.output_activation);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  if (j.contains("embedding_size") && j.at("embedding_size").get<int>() != c.embedding_size()) {
    throw ConfigError("model config: embedding_size " + j.at("embedding_size").dump() +
                      " disagrees with the derived value " + std::to_string(c.embedding_size()));
  }
}

}  // namespace framecast
