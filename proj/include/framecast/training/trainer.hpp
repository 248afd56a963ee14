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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/data/tuples.hpp"
#include "framecast/errors.hpp"
#include "framecast/model/checkpoint.hpp"
#include "framecast/model/network.hpp"

namespace framecast {

/// Optimizer and run settings. "Dropout rate" is ambiguous between keep and
/// drop probability; `dropout_means_keep` selects the reading.
struct TrainConfig {
  int batch_size = 16;
  std::int64_t max_steps = 500000;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double dropout_rate = 0.8;
  bool dropout_means_keep = true;
  std::int64_t checkpoint_interval = 1000;
  std::uint64_t seed = 0;
  double max_dt_ms = 200.0;
  /// Threads computing per-sample gradients; results do not depend on it.
  int workers = 1;

  double keep_probability() const { return dropout_means_keep ? dropout_rate : 1.0 - dropout_rate; }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (max_steps < 0) fail("max_steps must be >= 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be non-negative");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      fail("Adam betas must lie in [0,1)");
    if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
    const double keep = keep_probability();
    if (!(keep > 0.0 && keep <= 1.0)) fail("dropout keep probability must lie in (0,1]");
    if (checkpoint_interval < 0) fail("checkpoint_interval must be >= 0");
    if (!(max_dt_ms > 0.0)) fail("max_dt_ms must be positive");
    if (workers < 1) fail("workers must be >= 1");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"max_steps", c.max_steps},
                     {"learning_rate", c.learning_rate},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_epsilon", c.adam_epsilon},
                     {"dropout_rate", c.dropout_rate},
                     {"dropout_rate_meaning", c.dropout_means_keep ? "keep" : "drop"},
                     {"checkpoint_interval", c.checkpoint_interval},
                     {"seed", c.seed},
                     {"max_dt_ms", c.max_dt_ms},
                     {"workers", c.workers}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  const auto meaning = j.value("dropout_rate_meaning", std::string(c.dropout_means_keep ? "keep" : "drop"));
  if (meaning != "keep" && meaning != "drop") throw ConfigError("dropout_rate_meaning must be 'keep' or 'drop'");
  c.dropout_means_keep = meaning == "keep";
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.seed = j.value("seed", c.seed);
  c.max_dt_ms = j.value("max_dt_ms", c.max_dt_ms);
  c.workers = j.value("workers", c.workers);
}

struct LossStatistics {
  double last = 0.0;
  double ema = 0.0;  // exponential moving average, smoothing 0.99
  std::int64_t count = 0;

  void add(double loss) {
    last = loss;
    ema = count == 0 ? loss : 0.99 * ema + 0.01 * loss;
    ++count;
  }
  friend bool operator==(const LossStatistics&, const LossStatistics&) = default;
};

/// Optimizer state. Parameters and moments are float32, the checkpoint
/// payload type, so a save/restore cycle is exact.
struct TrainState {
  std::int64_t step = 0;
  ModelParameters<float> params;
  std::vector<float> adam_m;
  std::vector<float> adam_v;
  LossStatistics loss;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

inline TrainState initial_state(const Network<float>& net, std::uint64_t seed) {
  TrainState s;
  s.seed = seed;
  s.params = net.initialize(seed);
  s.adam_m.assign(s.params.size(), 0.0f);
  s.adam_v.assign(s.params.size(), 0.0f);
  return s;
}

/// Per-pixel mean of squared differences.
inline double l2_loss(const Frame& predicted, const Frame& target) {
  if (!predicted.same_shape(target)) throw ShapeError("l2_loss: frame resolutions differ");
  double sum = 0.0;
  const auto a = predicted.pixels();
  const auto b = target.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

/// Mean batch loss and its gradient, summed over samples in index order so the
/// result is independent of how samples are spread over workers.
inline double batch_gradient(const Network<float>& net, const TrainState& state, std::span<const SampleTuple> batch,
                             int workers, AlignedVector<float>& grad) {
  const std::size_t n = batch.size();
  std::vector<AlignedVector<float>> per_sample(n, AlignedVector<float>(state.params.size(), 0.0f));
  std::vector<double> losses(n, 0.0);
  auto work = [&](std::size_t i) {
    const auto dropout = mix_seed(state.seed, static_cast<std::uint64_t>(state.step), 0xd0 + i);
    losses[i] = net.loss_and_gradient(batch[i].input_frame, batch[i].dt.millis(), batch[i].target_frame,
                                      state.params, dropout, per_sample[i]);
  };
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t t = 0; t < w; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += w) work(i);
      });
    }
  }
  grad.assign(state.params.size(), 0.0f);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += per_sample[i][k];
    loss += losses[i];
  }
  const float inv = 1.0f / static_cast<float>(n);
  for (float& g : grad) g *= inv;
  return loss / static_cast<double>(n);
}

/// One Adam update from the mean gradient of a minibatch (dropout active).
inline TrainState train_step(TrainState state, std::span<const SampleTuple> batch, const Network<float>& net,
                             const TrainConfig& cfg) {
  if (batch.empty()) throw ConfigError("train_step: empty batch");
  for (const auto& t : batch) {
    net.check_frame(t.input_frame);
    net.check_frame(t.target_frame);
  }
  AlignedVector<float> grad;
  const double loss = batch_gradient(net, state, batch, cfg.workers, grad);
  if (!std::isfinite(loss) || loss < 0.0) throw DivergenceError(state.step, "loss is " + std::to_string(loss));
  for (float g : grad) {
    if (!std::isfinite(g)) throw DivergenceError(state.step, "non-finite gradient");
  }
  const double t = static_cast<double>(state.step + 1);
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double step_size = cfg.learning_rate * std::sqrt(1.0 - std::pow(b2, t)) / (1.0 - std::pow(b1, t));
  const float eps_hat = static_cast<float>(cfg.adam_epsilon * std::sqrt(1.0 - std::pow(b2, t)));
  auto params = state.params.values();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.adam_m[i] = static_cast<float>(b1) * state.adam_m[i] + static_cast<float>(1.0 - b1) * grad[i];
    state.adam_v[i] = static_cast<float>(b2) * state.adam_v[i] + static_cast<float>(1.0 - b2) * grad[i] * grad[i];
    params[i] -= static_cast<float>(step_size) * state.adam_m[i] / (std::sqrt(state.adam_v[i]) + eps_hat);
    if (!std::isfinite(params[i])) throw DivergenceError(state.step, "non-finite parameter after update");
  }
  ++state.step;
  state.loss.add(loss);
  return state;
}

struct StepRecord {
  std::int64_t step = 0;
  double wall_seconds = 0.0;
  double loss = 0.0;
  double learning_rate = 0.0;
};

inline void to_json(nlohmann::json& j, const StepRecord& r) {
  j = nlohmann::json{{"step", r.step}, {"wall_time", r.wall_seconds}, {"loss", r.loss}, {"lr", r.learning_rate}};
}

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const TrainState&)> on_checkpoint;
  /// Polled before every step; returning true ends the run early.
  std::function<bool(std::int64_t)> should_stop;
};

/// Continues `state` up to cfg.max_steps. The minibatch of step s is drawn from
/// an engine seeded by (seed, s), so a run restored from any checkpoint follows
/// the same trajectory as an uninterrupted one.
inline TrainState train(TrainState state, const TrainConfig& cfg, const TupleStream& stream, const Network<float>& net,
                        const TrainHooks& hooks = {}) {
  cfg.validate();
  state.params.audit(net.layout());
  if (std::abs(net.config().dropout_keep_probability - cfg.keep_probability()) > 1e-12) {
    throw ConfigError("train: network keep probability differs from the training configuration");
  }
  if (state.adam_m.size() != state.params.size() || state.adam_v.size() != state.params.size()) {
    throw ShapeError("train: Adam moment shapes differ from the parameters");
  }
  const auto t0 = std::chrono::steady_clock::now();
  while (state.step < cfg.max_steps) {
    if (hooks.should_stop && hooks.should_stop(state.step)) break;
    std::mt19937_64 rng(mix_seed(cfg.seed, 0xba7c4, static_cast<std::uint64_t>(state.step)));
    const auto batch = stream.batch(static_cast<std::size_t>(cfg.batch_size), rng);
    state = train_step(std::move(state), batch, net, cfg);
    if (hooks.on_step) {
      const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
      hooks.on_step({state.step, wall.count(), state.loss.last, cfg.learning_rate});
    }
    if (hooks.on_checkpoint && cfg.checkpoint_interval > 0 && state.step % cfg.checkpoint_interval == 0) {
      hooks.on_checkpoint(state);
    }
  }
  return state;
}

/// Builds the checkpoint record of a training state.
inline Checkpoint make_checkpoint(const TrainState& state, const ModelConfig& model, const TrainConfig& cfg,
                                  nlohmann::json extra = nlohmann::json::object()) {
  Checkpoint c;
  c.model = model;
  c.params = state.params;
  c.adam_m = state.adam_m;
  c.adam_v = state.adam_v;
  c.training = {{"step", state.step},
                {"seed", state.seed},
                {"config", cfg},
                {"loss", {{"last", state.loss.last}, {"ema", state.loss.ema}, {"count", state.loss.count}}},
                {"extra", std::move(extra)}};
  return c;
}

/// Restores a resumable training state from a checkpoint.
inline TrainState restore_state(const Checkpoint& c) {
  if (c.adam_m.empty()) throw CheckpointError("checkpoint has no optimizer state to resume from");
  TrainState s;
  try {
    s.step = c.training.at("step").get<std::int64_t>();
    s.seed = c.training.at("seed").get<std::uint64_t>();
    const auto& loss = c.training.at("loss");
    s.loss.last = loss.at("last").get<double>();
    s.loss.ema = loss.at("ema").get<double>();
    s.loss.count = loss.at("count").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint training metadata: ") + e.what());
  }
  s.params = c.params;
  s.adam_m = c.adam_m;
  s.adam_v = c.adam_v;
  return s;
}

}  // namespace framecast
