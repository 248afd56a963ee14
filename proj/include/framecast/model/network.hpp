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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framecast/frame.hpp"
#include "framecast/model/config.hpp"
#include "framecast/model/layers.hpp"
#include "framecast/model/parameters.hpp"

namespace framecast {

/// Number of encoder and decoder executions, for verifying one-step prediction.
struct PassCounters {
  std::atomic<std::uint64_t> encoder{0};
  std::atomic<std::uint64_t> decoder{0};

  void reset() {
    encoder = 0;
    decoder = 0;
  }
};

/// Two-branch encoder (image, time) with a transpose-convolution decoder.
///
/// The network object is immutable geometry; parameters are passed in
/// explicitly so one network can evaluate many parameter sets concurrently.
template <typename T>
class Network {
 public:
  /// Everything one layer's backward pass needs.
  struct LayerRecord {
    AlignedVector<T> input;
    AlignedVector<T> activated;  // post-activation, pre-dropout
    std::vector<std::uint8_t> keep;
    AlignedVector<T> cols;
  };

  struct Trace {
    std::vector<LayerRecord> records;
    AlignedVector<T> output;
    bool training = false;
  };

  explicit Network(ModelConfig config)
      : config_(std::move(config)), layout_(build_layout(config_)),
        counters_(std::make_shared<PassCounters>()) {
    for (const auto& layer : layout_.layers) {
      if (layer.branch == Branch::Image) ++image_layers_;
      if (layer.branch == Branch::Time) ++time_layers_;
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  const NetworkLayout& layout() const noexcept { return layout_; }
  PassCounters& counters() const noexcept { return *counters_; }

  ModelParameters<T> initialize(std::uint64_t seed) const {
    return initialize_parameters<T>(layout_, seed);
  }
  ModelParameters<T> zero_parameters() const { return ModelParameters<T>(layout_.slots); }

  /// Image branch. Dropout is active only when `dropout_seed` is given.
  AlignedVector<T> encode_image(const Frame& frame, const ModelParameters<T>& params,
                              std::optional<std::uint64_t> dropout_seed = std::nullopt) const {
    check_frame(frame);
    params.audit(layout_);
    counters_->encoder.fetch_add(1, std::memory_order_relaxed);
    return run(image_begin(), image_end(), to_input(frame), params, dropout_seed, nullptr);
  }

  AlignedVector<T> encode_time(TemporalDisplacement dt, const ModelParameters<T>& params) const {
    require_time_branch();
    params.audit(layout_);
    return run(time_begin(), time_end(), time_input(dt.millis()), params, std::nullopt, nullptr);
  }

  Frame decode(std::span<const T> embedding, const ModelParameters<T>& params) const {
    if (static_cast<int>(embedding.size()) != config_.embedding_size()) {
      throw ShapeError("decode: embedding length " + std::to_string(embedding.size()) +
                       " != configured " + std::to_string(config_.embedding_size()));
    }
    params.audit(layout_);
    counters_->decoder.fetch_add(1, std::memory_order_relaxed);
    auto out = run(decoder_begin(), decoder_end(), AlignedVector<T>(embedding.begin(), embedding.end()),
                   params, std::nullopt, nullptr);
    return to_frame(out);
  }

  /// Image embedding first, time embedding second.
  static AlignedVector<T> concatenate(std::span<const T> image, std::span<const T> time) {
    AlignedVector<T> embedding(image.begin(), image.end());
    embedding.insert(embedding.end(), time.begin(), time.end());
    return embedding;
  }

  /// One-step prediction of the frame `dt` after `frame`: one encoder pass and
  /// one decoder pass, whatever the magnitude of dt.
  Frame predict(const Frame& frame, TemporalDisplacement dt, const ModelParameters<T>& params) const {
    require_time_branch();
    const auto image = encode_image(frame, params);
    const auto time = encode_time(dt, params);
    return decode(concatenate(image, time), params);
  }

  /// Prediction for a network without a time branch (the fixed-step baseline).
  Frame predict_next(const Frame& frame, const ModelParameters<T>& params) const {
    if (config_.time_branch) throw ConfigError("predict_next requires a network without time branch");
    return decode(encode_image(frame, params), params);
  }

  /// Differentiable forward pass over raw input intensities.
  void forward(std::span<const T> image, double dt_millis, const ModelParameters<T>& params,
               std::optional<std::uint64_t> dropout_seed, Trace& trace) const {
    if (image.size() != static_cast<std::size_t>(config_.input_height) * config_.input_width) {
      throw ConfigError("forward: input size does not match the configured resolution");
    }
    params.audit(layout_);
    counters_->encoder.fetch_add(1, std::memory_order_relaxed);
    counters_->decoder.fetch_add(1, std::memory_order_relaxed);
    trace.records.resize(layout_.layers.size());
    trace.training = dropout_seed.has_value();
    auto embedding =
        run(image_begin(), image_end(), AlignedVector<T>(image.begin(), image.end()), params, dropout_seed, &trace);
    if (config_.time_branch) {
      if (!(dt_millis > 0.0)) throw DomainError("forward: dt must be positive");
      const auto time = run(time_begin(), time_end(), time_input(dt_millis), params, dropout_seed, &trace);
      embedding.insert(embedding.end(), time.begin(), time.end());
    }
    trace.output = run(decoder_begin(), decoder_end(), std::move(embedding), params, dropout_seed, &trace);
  }

  /// Accumulates dL/dparams into `grad` given dL/d(output) of a traced pass.
  void backward(const Trace& trace, std::span<const T> grad_output, const ModelParameters<T>& params,
                std::span<T> grad) const {
    if (grad.size() != params.size()) throw ShapeError("backward: gradient buffer size mismatch");
    AlignedVector<T> upstream(grad_output.begin(), grad_output.end());
    AlignedVector<T> scratch;
    // Decoder, then split dL/d(embedding) between the two encoder branches.
    upstream = backward_range(decoder_begin(), decoder_end(), trace, std::move(upstream), params, grad,
                              scratch, true);
    const std::size_t image_width = static_cast<std::size_t>(config_.image_embedding_size());
    if (config_.time_branch) {
      AlignedVector<T> time_grad(upstream.begin() + image_width, upstream.end());
      backward_range(time_begin(), time_end(), trace, std::move(time_grad), params, grad, scratch, false);
    }
    upstream.resize(image_width);
    backward_range(image_begin(), image_end(), trace, std::move(upstream), params, grad, scratch, false);
  }

  /// Mean squared error of the traced output against `target` and its
  /// gradient with respect to the output.
  static T l2_with_gradient(std::span<const T> output, std::span<const float> target,
                            AlignedVector<T>& grad_output) {
    grad_output.resize(output.size());
    T sum = 0;
    const T n = static_cast<T>(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) {
      const T d = output[i] - static_cast<T>(target[i]);
      sum += d * d;
      grad_output[i] = T(2) * d / n;
    }
    return sum / n;
  }

  /// Loss of one tuple and accumulation of its parameter gradient.
  T loss_and_gradient(const Frame& input, double dt_millis, const Frame& target,
                      const ModelParameters<T>& params, std::optional<std::uint64_t> dropout_seed,
                      std::span<T> grad) const {
    check_frame(input);
    check_frame(target);
    Trace trace;
    forward(to_input(input), dt_millis, params, dropout_seed, trace);
    AlignedVector<T> grad_output;
    const T loss = l2_with_gradient(trace.output, target.pixels(), grad_output);
    backward(trace, grad_output, params, grad);
    return loss;
  }

  T loss(const Frame& input, double dt_millis, const Frame& target, const ModelParameters<T>& params,
         std::optional<std::uint64_t> dropout_seed = std::nullopt) const {
    check_frame(input);
    check_frame(target);
    Trace trace;
    forward(to_input(input), dt_millis, params, dropout_seed, trace);
    AlignedVector<T> unused;
    return l2_with_gradient(trace.output, target.pixels(), unused);
  }

  void check_frame(const Frame& frame) const {
    if (frame.height() != config_.input_height || frame.width() != config_.input_width) {
      throw ConfigError("frame is " + std::to_string(frame.height()) + "x" + std::to_string(frame.width()) +
                        ", model expects " + std::to_string(config_.input_height) + "x" +
                        std::to_string(config_.input_width));
    }
  }

  static AlignedVector<T> to_input(const Frame& frame) {
    return AlignedVector<T>(frame.pixels().begin(), frame.pixels().end());
  }

  Frame to_frame(std::span<const T> values) const {
    std::vector<float> pixels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      pixels[i] = std::clamp(static_cast<float>(values[i]), 0.0f, 1.0f);
    }
    return Frame(config_.input_height, config_.input_width, std::move(pixels));
  }

 private:
  std::size_t image_begin() const { return 0; }
  std::size_t image_end() const { return image_layers_; }
  std::size_t time_begin() const { return image_layers_; }
  std::size_t time_end() const { return image_layers_ + time_layers_; }
  std::size_t decoder_begin() const { return time_end(); }
  std::size_t decoder_end() const { return layout_.layers.size(); }

  void require_time_branch() const {
    if (!config_.time_branch) throw ConfigError("network has no time branch");
  }

  AlignedVector<T> time_input(double millis) const {
    return {static_cast<T>(millis * config_.time_input_scale)};
  }

  AlignedVector<T> run(std::size_t begin, std::size_t end, AlignedVector<T> x, const ModelParameters<T>& params,
                     std::optional<std::uint64_t> dropout_seed, Trace* trace) const {
    AlignedVector<T> cols;
    for (std::size_t li = begin; li < end; ++li) {
      const LayerSpec& spec = layout_.layers[li];
      AlignedVector<T> z(spec.output_size());
      layers::forward_linear<T>(spec, params.tensor(spec.weight_slot), params.tensor(spec.bias_slot), x, z, cols);
      layers::activate<T>(spec.activation, z);
      LayerRecord* rec = trace ? &trace->records[li] : nullptr;
      if (rec) {
        rec->input = std::move(x);
        rec->activated = z;
        rec->cols = std::move(cols);
        rec->keep.clear();
        cols = {};
      }
      if (spec.dropout && dropout_seed && config_.dropout_keep_probability < 1.0) {
        const double keep_p = config_.dropout_keep_probability;
        const T scale = static_cast<T>(1.0 / keep_p);
        std::mt19937_64 rng(mix_seed(*dropout_seed, 0xd709, li));
        std::vector<std::uint8_t> keep(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
          keep[i] = unit_uniform(rng) < keep_p ? 1 : 0;
          z[i] = keep[i] ? z[i] * scale : T(0);
        }
        if (rec) rec->keep = std::move(keep);
      }
      x = std::move(z);
    }
    return x;
  }

  AlignedVector<T> backward_range(std::size_t begin, std::size_t end, const Trace& trace, AlignedVector<T> upstream,
                                const ModelParameters<T>& params, std::span<T> grad, AlignedVector<T>& scratch,
                                bool need_input_grad) const {
    const T scale = static_cast<T>(1.0 / config_.dropout_keep_probability);
    for (std::size_t li = end; li-- > begin;) {
      const LayerSpec& spec = layout_.layers[li];
      const LayerRecord& rec = trace.records[li];
      if (!rec.keep.empty()) {
        for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] = rec.keep[i] ? upstream[i] * scale : T(0);
      }
      layers::activation_backward<T>(spec.activation, rec.activated, upstream);
      const auto& wslot = params.slots()[spec.weight_slot];
      const auto& bslot = params.slots()[spec.bias_slot];
      const bool first = li == begin;
      AlignedVector<T> down(first && !need_input_grad ? 0 : spec.input_size());
      layers::backward_linear<T>(spec, params.tensor(spec.weight_slot), rec.input, rec.cols, upstream,
                                 grad.subspan(wslot.offset, wslot.size), grad.subspan(bslot.offset, bslot.size),
                                 down, scratch);
      upstream = std::move(down);
    }
    return upstream;
  }

  ModelConfig config_;
  NetworkLayout layout_;
  std::shared_ptr<PassCounters> counters_;
  std::size_t image_layers_ = 0;
  std::size_t time_layers_ = 0;
};

}  // namespace framecast
