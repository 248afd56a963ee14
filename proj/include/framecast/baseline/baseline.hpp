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

#include <vector>

#include "framecast/errors.hpp"
#include "framecast/model/config.hpp"
#include "framecast/model/network.hpp"

namespace framecast {

/// Fixed-step comparison model: the time-conditioned architecture with the
/// time branch removed, trained on displacement `step_millis` only.
struct BaselineConfig {
  double step_millis = 40.0;
  ModelConfig model = baseline_model(ModelConfig{});

  static ModelConfig baseline_model(ModelConfig c) {
    c.time_branch = false;
    return c;
  }

  void validate() const {
    if (!(step_millis > 0.0)) throw ConfigError("baseline: step_millis must be positive");
    if (model.time_branch) throw ConfigError("baseline: model configuration must not have a time branch");
    model.validate();
  }
};

/// Feeds each prediction back as the next input. Output i (1-based) is the
/// anticipation at i * step_millis; exactly k network passes are made.
template <typename T>
std::vector<Frame> baseline_predict_rollout(const Frame& frame, int k, const ModelParameters<T>& params,
                                            const Network<T>& net) {
  if (k < 1) throw DomainError("rollout length k must be >= 1");
  std::vector<Frame> out;
  out.reserve(static_cast<std::size_t>(k));
  const Frame* current = &frame;
  for (int i = 0; i < k; ++i) {
    out.push_back(net.predict_next(*current, params));
    current = &out.back();
  }
  return out;
}

/// Number of rollout steps that reaches `dt_millis`, or 0 when it is not a
/// whole multiple of the baseline step.
inline int rollout_steps_for(double dt_millis, const BaselineConfig& cfg) {
  const double k = dt_millis / cfg.step_millis;
  const long r = std::lround(k);
  return r >= 1 && std::abs(k - static_cast<double>(r)) < 1e-9 ? static_cast<int>(r) : 0;
}

}  // namespace framecast
