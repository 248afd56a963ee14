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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/errors.hpp"
#include "framecast/model/config.hpp"
#include "framecast/model/parameters.hpp"

namespace framecast {

enum class ModelKind { TimeConditioned, Baseline };

inline std::string to_string(ModelKind k) {
  return k == ModelKind::TimeConditioned ? "time_conditioned" : "baseline";
}

inline ModelKind kind_of(const ModelConfig& c) {
  return c.time_branch ? ModelKind::TimeConditioned : ModelKind::Baseline;
}

/// Contents of one checkpoint file. `training` is free-form structured
/// metadata (optimizer step, seeds, run configuration); Adam moments are
/// present only for resumable training checkpoints.
struct Checkpoint {
  ModelConfig model;
  nlohmann::json training = nlohmann::json::object();
  ModelParameters<float> params;
  std::vector<float> adam_m;
  std::vector<float> adam_v;

  ModelKind kind() const { return kind_of(model); }
};

inline constexpr std::array<char, 8> kCheckpointMagic{'F', 'C', 'A', 'S', 'T', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class LittleEndianWriter {
 public:
  explicit LittleEndianWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

  template <typename U>
  void integer(U v) {
    std::array<unsigned char, sizeof(U)> b;
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b.data(), b.size());
  }

  void f32(float v) { integer(std::bit_cast<std::uint32_t>(v)); }

  void string(const std::string& s) {
    integer(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

class LittleEndianReader {
 public:
  LittleEndianReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw CheckpointError("truncated checkpoint '" + origin_ + "'");
  }

  template <typename U>
  U integer() {
    std::array<unsigned char, sizeof(U)> b;
    bytes(b.data(), b.size());
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }

  float f32() { return std::bit_cast<float>(integer<std::uint32_t>()); }

  std::string string(std::size_t limit) {
    const auto n = integer<std::uint32_t>();
    if (n > limit) throw CheckpointError("implausible string length in '" + origin_ + "'");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
  std::string origin_;
};

inline void write_tensor(LittleEndianWriter& w, const std::string& name, const std::vector<int>& shape,
                         std::span<const float> values) {
  w.string(name);
  w.integer(static_cast<std::uint32_t>(shape.size()));
  for (int d : shape) w.integer(static_cast<std::uint32_t>(d));
  w.integer(static_cast<std::uint64_t>(values.size()));
  for (float v : values) w.f32(v);
}

}  // namespace detail

/// Single-file container: magic, version, JSON header (model configuration
/// and training metadata), then named tensors with explicit shapes and
/// little-endian float32 payloads. Written to a temporary file and renamed, so
/// an interrupted save leaves the previous checkpoint intact.
inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ckpt.params.audit(ckpt.model);
  const bool with_moments = !ckpt.adam_m.empty();
  if (with_moments && (ckpt.adam_m.size() != ckpt.params.size() || ckpt.adam_v.size() != ckpt.params.size())) {
    throw ShapeError("checkpoint: Adam moment sizes differ from the parameter count");
  }
  nlohmann::json header{{"format", "framecast-checkpoint"},
                        {"kind", to_string(ckpt.kind())},
                        {"model_config", ckpt.model},
                        {"training", ckpt.training}};
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write '" + tmp.string() + "'");
    detail::LittleEndianWriter w(out);
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.integer(kCheckpointVersion);
    const std::string text = header.dump();
    w.integer(static_cast<std::uint64_t>(text.size()));
    w.bytes(text.data(), text.size());
    const auto& slots = ckpt.params.slots();
    w.integer(static_cast<std::uint32_t>(slots.size() * (with_moments ? 3 : 1)));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      detail::write_tensor(w, "param/" + slots[i].name, slots[i].shape, ckpt.params.tensor(i));
    }
    if (with_moments) {
      for (const auto* moments : {&ckpt.adam_m, &ckpt.adam_v}) {
        const std::string prefix = moments == &ckpt.adam_m ? "adam_m/" : "adam_v/";
        for (const auto& slot : slots) {
          detail::write_tensor(w, prefix + slot.name, slot.shape,
                               std::span<const float>(*moments).subspan(slot.offset, slot.size));
        }
      }
    }
    out.flush();
    if (!out) throw CheckpointError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Reads a checkpoint and audits every tensor shape against its own model
/// configuration. With `expected` set, a checkpoint of the other model kind is
/// rejected.
inline Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<ModelKind> expected = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  detail::LittleEndianReader r(in, path.string());
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kCheckpointMagic) throw CheckpointError("'" + path.string() + "' is not a framecast checkpoint");
  const auto version = r.integer<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = r.integer<std::uint64_t>();
  if (header_len > (1u << 26)) throw CheckpointError("implausible header length");
  std::string text(header_len, '\0');
  r.bytes(text.data(), text.size());

  Checkpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ckpt.model = header.at("model_config").get<ModelConfig>();
    ckpt.training = header.value("training", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint header: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint model config: ") + e.what());
  }
  if (header.value("kind", "") != to_string(ckpt.kind())) {
    throw CheckpointError("checkpoint kind field disagrees with its model configuration");
  }
  if (expected && *expected != ckpt.kind()) {
    throw CheckpointError("'" + path.string() + "' holds a " + to_string(ckpt.kind()) + " model, a " +
                          to_string(*expected) + " model is required");
  }

  const NetworkLayout layout = build_layout(ckpt.model);
  ckpt.params = ModelParameters<float>(layout.slots);
  const auto count = r.integer<std::uint32_t>();
  const bool with_moments = count == layout.slots.size() * 3;
  if (count != layout.slots.size() && !with_moments) {
    throw ShapeError("shape audit: checkpoint holds " + std::to_string(count) + " tensors, configuration implies " +
                     std::to_string(layout.slots.size()));
  }
  if (with_moments) {
    ckpt.adam_m.assign(layout.parameter_count, 0.0f);
    ckpt.adam_v.assign(layout.parameter_count, 0.0f);
  }
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t group = t / layout.slots.size();
    const auto& slot = layout.slots[t % layout.slots.size()];
    const char* prefix = group == 0 ? "param/" : group == 1 ? "adam_m/" : "adam_v/";
    const auto name = r.string(4096);
    if (name != prefix + slot.name) {
      throw ShapeError("shape audit: expected tensor '" + std::string(prefix) + slot.name + "', found '" + name + "'");
    }
    const auto ndim = r.integer<std::uint32_t>();
    if (ndim > 8) throw ShapeError("shape audit: tensor '" + name + "' has implausible rank");
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(r.integer<std::uint32_t>());
    if (shape != slot.shape) {
      throw ShapeError("shape audit: tensor '" + name + "' is " + ModelParameters<float>::shape_string(shape) +
                       ", configuration requires " + ModelParameters<float>::shape_string(slot.shape));
    }
    const auto n = r.integer<std::uint64_t>();
    if (n != slot.size) throw ShapeError("shape audit: tensor '" + name + "' payload size mismatch");
    float* dst = group == 0 ? ckpt.params.tensor(t % layout.slots.size()).data()
                 : group == 1 ? ckpt.adam_m.data() + slot.offset
                              : ckpt.adam_v.data() + slot.offset;
    for (std::uint64_t i = 0; i < n; ++i) dst[i] = r.f32();
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("trailing bytes after the last tensor in '" + path.string() + "'");
  }
  return ckpt;
}

}  // namespace framecast
