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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "framecast/errors.hpp"
#include "framecast/model/config.hpp"

namespace framecast {

/// Storage for every tensor the network touches. A fixed base alignment keeps
/// Eigen's vectorized reductions on the same summation order for every
/// allocation, which bit-exact reproducibility depends on.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

enum class LayerKind { Conv, TransposeConv, Dense };
enum class Activation { Relu, Sigmoid };
enum class Branch { Image, Time, Decoder };

/// One named tensor inside the flat parameter buffer.
struct ParamSlot {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

/// Geometry of one layer. Dense layers use `in_channels`/`out_channels` as
/// feature counts and 1x1 extents.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Dense;
  Branch branch = Branch::Image;
  int in_channels = 0;
  int out_channels = 0;
  Extent in{1, 1};
  Extent out{1, 1};
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  Activation activation = Activation::Relu;
  bool dropout = false;
  std::size_t weight_slot = 0;
  std::size_t bias_slot = 0;

  std::size_t input_size() const { return static_cast<std::size_t>(in_channels) * in.height * in.width; }
  std::size_t output_size() const {
    return static_cast<std::size_t>(out_channels) * out.height * out.width;
  }
  int fan_in() const {
    switch (kind) {
      case LayerKind::Conv: return in_channels * kernel * kernel;
      case LayerKind::TransposeConv:
        return std::max(1, in_channels * kernel * kernel / (stride * stride));
      case LayerKind::Dense: return in_channels;
    }
    return 1;
  }
};

/// Every layer and parameter tensor implied by a ModelConfig.
struct NetworkLayout {
  std::vector<LayerSpec> layers;
  std::vector<ParamSlot> slots;
  std::size_t parameter_count = 0;

  std::size_t find_slot(const std::string& name) const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].name == name) return i;
    }
    throw ShapeError("no parameter tensor named '" + name + "'");
  }
};

namespace detail {

inline std::size_t product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

class LayoutBuilder {
 public:
  void add(LayerSpec spec) {
    std::vector<int> wshape;
    switch (spec.kind) {
      case LayerKind::Conv:
        wshape = {spec.out_channels, spec.in_channels, spec.kernel, spec.kernel};
        break;
      case LayerKind::TransposeConv:
        wshape = {spec.in_channels, spec.out_channels, spec.kernel, spec.kernel};
        break;
      case LayerKind::Dense:
        wshape = {spec.out_channels, spec.in_channels};
        break;
    }
    spec.weight_slot = push(spec.name + ".weight", std::move(wshape));
    spec.bias_slot = push(spec.name + ".bias", {spec.out_channels});
    layout_.layers.push_back(std::move(spec));
  }

  NetworkLayout finish() && { return std::move(layout_); }

 private:
  std::size_t push(std::string name, std::vector<int> shape) {
    ParamSlot slot{std::move(name), std::move(shape), layout_.parameter_count, 0};
    slot.size = product(slot.shape);
    layout_.parameter_count += slot.size;
    layout_.slots.push_back(std::move(slot));
    return layout_.slots.size() - 1;
  }

  NetworkLayout layout_;
};

inline LayerSpec conv(std::string name, int in_ch, int out_ch, Extent in, Extent out, int k,
                      int stride, int pad) {
  LayerSpec s;
  s.name = std::move(name);
  s.kind = LayerKind::Conv;
  s.in_channels = in_ch;
  s.out_channels = out_ch;
  s.in = in;
  s.out = out;
  s.kernel = k;
  s.stride = stride;
  s.pad = pad;
  return s;
}

inline LayerSpec dense(std::string name, Branch branch, int in, int out, bool dropout) {
  LayerSpec s;
  s.name = std::move(name);
  s.kind = LayerKind::Dense;
  s.branch = branch;
  s.in_channels = in;
  s.out_channels = out;
  s.dropout = dropout;
  return s;
}

}  // namespace detail

inline NetworkLayout build_layout(const ModelConfig& config) {
  using detail::conv;
  using detail::dense;
  config.validate();
  detail::LayoutBuilder builder;
  const auto sizes = config.spatial_schedule();
  const int n = config.stages();
  const auto& ch = config.encoder_channels;
  const auto& ks = config.encoder_kernel_schedule;

  int in_ch = 1;
  for (int i = 0; i < n; ++i) {
    builder.add(conv("enc.conv" + std::to_string(i), in_ch, ch[i], sizes[i], sizes[i], ks[i], 1,
                     (ks[i] - 1) / 2));
    builder.add(conv("enc.pool" + std::to_string(i), ch[i], ch[i], sizes[i], sizes[i + 1], 2, 2, 0));
    in_ch = ch[i];
  }
  builder.add(conv("enc.conv" + std::to_string(n), in_ch, config.bottleneck_channels, sizes[n],
                   sizes[n], ks[n], 1, (ks[n] - 1) / 2));

  int width = config.flatten_size();
  if (!config.flatten_is_first_fc && !config.encoder_fc_sizes.empty()) {
    builder.add(dense("enc.fc_proj", Branch::Image, width, config.encoder_fc_sizes[0], true));
    width = config.encoder_fc_sizes[0];
  }
  for (std::size_t i = 1; i < config.encoder_fc_sizes.size(); ++i) {
    builder.add(dense("enc.fc" + std::to_string(i), Branch::Image, width, config.encoder_fc_sizes[i], true));
    width = config.encoder_fc_sizes[i];
  }

  if (config.time_branch) {
    int tw = 1;
    for (std::size_t i = 0; i < config.time_branch_fc_sizes.size(); ++i) {
      builder.add(dense("time.fc" + std::to_string(i), Branch::Time, tw, config.time_branch_fc_sizes[i], false));
      tw = config.time_branch_fc_sizes[i];
    }
  }

  width = config.embedding_size();
  for (std::size_t i = 0; i < config.decoder_fc_sizes.size(); ++i) {
    builder.add(dense("dec.fc" + std::to_string(i), Branch::Decoder, width, config.decoder_fc_sizes[i], true));
    width = config.decoder_fc_sizes[i];
  }
  if (width != config.flatten_size()) {
    builder.add(dense("dec.fc_proj", Branch::Decoder, width, config.flatten_size(), true));
  }

  const auto dec_ch = config.decoder_channels();
  in_ch = config.bottleneck_channels;
  for (int j = 0; j < n; ++j) {
    const Extent small = sizes[n - j];
    const Extent big = sizes[n - 1 - j];
    auto unpool = conv("dec.unpool" + std::to_string(j), in_ch, in_ch, small, big, 2, 2, 0);
    unpool.kind = LayerKind::TransposeConv;
    unpool.branch = Branch::Decoder;
    builder.add(unpool);
    const int k = config.decoder_kernel_schedule[j];
    auto deconv = conv("dec.deconv" + std::to_string(j), in_ch, dec_ch[j], big, big, k, 1, (k - 1) / 2);
    deconv.kind = LayerKind::TransposeConv;
    deconv.branch = Branch::Decoder;
    if (j + 1 == n) deconv.activation = Activation::Sigmoid;
    builder.add(deconv);
    in_ch = dec_ch[j];
  }
  return std::move(builder).finish();
}

/// Uniform double in [0,1) from the top 53 bits of a 64-bit engine.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// splitmix64 finalizer; derives independent seeds from (seed, stream, index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(a) ^ b) ^ c);
}

/// Named weight/bias tensors of one network, stored in a single flat buffer.
template <typename T>
class ModelParameters {
 public:
  ModelParameters() = default;
  explicit ModelParameters(std::vector<ParamSlot> slots)
      : slots_(std::move(slots)), values_(total(slots_), T(0)) {}
  ModelParameters(std::vector<ParamSlot> slots, AlignedVector<T> values)
      : slots_(std::move(slots)), values_(std::move(values)) {
    if (values_.size() != total(slots_)) throw ShapeError("parameter buffer size mismatch");
  }

  const std::vector<ParamSlot>& slots() const noexcept { return slots_; }
  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<T> tensor(std::size_t slot) {
    return std::span<T>(values_).subspan(slots_[slot].offset, slots_[slot].size);
  }
  std::span<const T> tensor(std::size_t slot) const {
    return std::span<const T>(values_).subspan(slots_[slot].offset, slots_[slot].size);
  }

  /// Throws ShapeError unless every tensor name and shape matches `config`.
  void audit(const ModelConfig& config) const { audit(build_layout(config)); }

  void audit(const NetworkLayout& layout) const {
    if (slots_.size() != layout.slots.size()) {
      throw ShapeError("shape audit: expected " + std::to_string(layout.slots.size()) +
                       " tensors, found " + std::to_string(slots_.size()));
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const auto& want = layout.slots[i];
      const auto& have = slots_[i];
      if (want.name != have.name || want.shape != have.shape || want.offset != have.offset) {
        throw ShapeError("shape audit: tensor " + std::to_string(i) + " is '" + have.name + "' " +
                         shape_string(have.shape) + ", config requires '" + want.name + "' " +
                         shape_string(want.shape));
      }
    }
    if (values_.size() != layout.parameter_count) throw ShapeError("shape audit: buffer size mismatch");
  }

  template <typename U>
  ModelParameters<U> cast() const {
    return ModelParameters<U>(slots_, AlignedVector<U>(values_.begin(), values_.end()));
  }

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;

  static std::string shape_string(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }

 private:
  static std::size_t total(const std::vector<ParamSlot>& slots) {
    std::size_t n = 0;
    for (const auto& s : slots) n += s.size;
    return n;
  }

  std::vector<ParamSlot> slots_;
  AlignedVector<T> values_;
};

/// He-style uniform weights bounded by sqrt(6 / fan_in); zero biases.
template <typename T>
ModelParameters<T> initialize_parameters(const NetworkLayout& layout, std::uint64_t seed) {
  ModelParameters<T> params(layout.slots);
  std::mt19937_64 rng(mix_seed(seed, 0x1a17));
  for (const auto& layer : layout.layers) {
    const double bound = std::sqrt(6.0 / layer.fan_in());
    for (T& w : params.tensor(layer.weight_slot)) {
      w = static_cast<T>((2.0 * unit_uniform(rng) - 1.0) * bound);
    }
  }
  return params;
}

}  // namespace framecast
