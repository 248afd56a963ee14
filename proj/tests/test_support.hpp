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
#include <vector>

#include "framecast/data/synthetic_corpus.hpp"
#include "framecast/frame.hpp"
#include "framecast/model/network.hpp"

namespace framecast::testing {

/// 16x16 input, three stages of two channels, FC widths [32, 16], time branch [4, 4].
inline ModelConfig miniature_config() {
  ModelConfig c;
  c.input_height = 16;
  c.input_width = 16;
  c.encoder_channels = {2, 2, 2};
  c.bottleneck_channels = 8;  // 2x2x8 = 32, the first FC width
  c.encoder_fc_sizes = {32, 16};
  c.time_branch_fc_sizes = {4, 4};
  c.decoder_fc_sizes = {16, 32};
  return c;
}

/// Moving squares sized for the miniature network: 16x16 frames at 25 fps,
/// six frames per video.
inline SyntheticCorpusSpec miniature_corpus_spec(int actors = 6, int videos_per_actor = 4) {
  SyntheticCorpusSpec spec;
  spec.prototype.height = 16;
  spec.prototype.width = 16;
  spec.prototype.size = 4.0;
  spec.prototype.velocity = {0.04, 0.0};
  spec.prototype.duration_ms = 201.0;
  spec.actors = actors;
  spec.videos_per_actor = videos_per_actor;
  return spec;
}

inline Frame random_frame(int height, int width, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> px(static_cast<std::size_t>(height) * width);
  for (float& p : px) p = u(rng);
  return Frame(height, width, std::move(px));
}

/// Initialized weights with small random biases, so no pre-activation sits
/// exactly on a ReLU kink (zero biases feeding dead units give z == 0).
inline ModelParameters<double> generic_parameters(const Network<double>& net, std::uint64_t seed) {
  auto params = net.initialize(seed);
  std::mt19937_64 rng(seed ^ 0xb1a5);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const auto& layer : net.layout().layers) {
    for (double& b : params.tensor(layer.bias_slot)) b = u(rng);
  }
  return params;
}

struct GradientCheckResult {
  std::size_t checked = 0;
  std::size_t passed = 0;
  double worst_relative = 0.0;

  double pass_fraction() const { return checked ? static_cast<double>(passed) / checked : 0.0; }
};

/// Compares analytic parameter gradients of the L2 loss with central finite
/// differences on `samples` randomly chosen coordinates.
inline GradientCheckResult gradient_check(const Network<double>& net, ModelParameters<double> params,
                                          const Frame& input, double dt, const Frame& target,
                                          std::optional<std::uint64_t> dropout_seed, std::size_t samples,
                                          std::uint64_t seed, double step = 1e-4, double rel_tol = 1e-3,
                                          double abs_tol = 1e-6) {
  AlignedVector<double> analytic(params.size(), 0.0);
  net.loss_and_gradient(input, dt, target, params, dropout_seed, analytic);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  GradientCheckResult result;
  auto values = params.values();
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t i = pick(rng);
    const double original = values[i];
    values[i] = original + step;
    const double plus = net.loss(input, dt, target, params, dropout_seed);
    values[i] = original - step;
    const double minus = net.loss(input, dt, target, params, dropout_seed);
    values[i] = original;
    const double numeric = (plus - minus) / (2.0 * step);
    const double a = analytic[i];
    bool ok;
    if (std::abs(a) < abs_tol && std::abs(numeric) < abs_tol) {
      ok = std::abs(a - numeric) <= abs_tol;
    } else {
      const double rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
      result.worst_relative = std::max(result.worst_relative, rel);
      ok = rel <= rel_tol;
    }
    ++result.checked;
    if (ok) ++result.passed;
  }
  return result;
}

}  // namespace framecast::testing
