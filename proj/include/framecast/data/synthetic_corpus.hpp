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

#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/data/corpus.hpp"
#include "framecast/data/synthetic.hpp"
#include "framecast/model/parameters.hpp"

namespace framecast {

/// Recipe for a corpus of synthetic videos: `actors` x `videos_per_actor`
/// scenes that share shape, motion and intensities, with start positions
/// drawn uniformly from the range that keeps the shape inside the frame.
/// Explicitly listed `scenes` are appended after the generated ones.
struct SyntheticCorpusSpec {
  SyntheticSceneSpec prototype;
  ActionLabel action = ActionLabel::Walking;
  int actors = 10;
  int videos_per_actor = 4;
  std::uint64_t seed = 1;
  std::vector<SyntheticSceneSpec> scenes;
};

struct LabeledScene {
  std::string video_id;
  std::string actor_id;
  ActionLabel action;
  SyntheticSceneSpec scene;
};

inline std::string actor_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "actor%02d", index);
  return buf;
}

namespace detail {

/// Admissible start-coordinate interval along one axis.
inline std::pair<double, double> start_range(double half, double extent, double drift_lo, double drift_hi) {
  return {half - drift_lo, extent - half - drift_hi};
}

}  // namespace detail

inline std::vector<LabeledScene> generate_scenes(const SyntheticCorpusSpec& spec) {
  const auto& proto = spec.prototype;
  if (spec.actors < 0 || spec.videos_per_actor < 0) throw ConfigError("synthetic corpus: counts must be >= 0");
  std::vector<LabeledScene> out;
  if (spec.actors > 0 && spec.videos_per_actor > 0) {
    double lo_x, hi_x, lo_y, hi_y;
    if (proto.motion == MotionKind::Linear) {
      const double dx = proto.velocity.x * proto.duration_ms;
      const double dy = proto.velocity.y * proto.duration_ms;
      std::tie(lo_x, hi_x) = detail::start_range(proto.half_width(), proto.width, std::min(0.0, dx), std::max(0.0, dx));
      std::tie(lo_y, hi_y) = detail::start_range(proto.half_height(), proto.height, std::min(0.0, dy), std::max(0.0, dy));
    } else {
      const double ax = std::abs(proto.amplitude * proto.axis.x);
      const double ay = std::abs(proto.amplitude * proto.axis.y);
      std::tie(lo_x, hi_x) = detail::start_range(proto.half_width(), proto.width, -ax, ax);
      std::tie(lo_y, hi_y) = detail::start_range(proto.half_height(), proto.height, -ay, ay);
    }
    if (lo_x > hi_x || lo_y > hi_y) {
      throw ConfigError("synthetic corpus: no start position keeps the shape inside the frame for the whole duration");
    }
    std::mt19937_64 rng(mix_seed(spec.seed, 0x5ce7e));
    for (int a = 1; a <= spec.actors; ++a) {
      for (int k = 1; k <= spec.videos_per_actor; ++k) {
        LabeledScene s{actor_name(a) + "_" + to_string(spec.action) + "_d" + std::to_string(k), actor_name(a),
                       spec.action, proto};
        s.scene.start = {lo_x + (hi_x - lo_x) * unit_uniform(rng), lo_y + (hi_y - lo_y) * unit_uniform(rng)};
        s.scene.validate();
        out.push_back(std::move(s));
      }
    }
  }
  for (std::size_t i = 0; i < spec.scenes.size(); ++i) {
    LabeledScene s{"scene" + std::to_string(i), "scene_actor" + std::to_string(i), spec.action, spec.scenes[i]};
    s.scene.validate();
    out.push_back(std::move(s));
  }
  return out;
}

/// Renders every scene; each video with at least two frames gets one segment
/// spanning all of its frames.
inline Corpus render_corpus(const std::vector<LabeledScene>& scenes) {
  Corpus corpus;
  for (const auto& s : scenes) {
    Video v{s.video_id, s.actor_id, s.action, s.scene.fps, {}};
    const int n = s.scene.frame_count();
    for (int i = 0; i < n; ++i) v.frames.push_back(render_synthetic(s.scene, i * 1000.0 / s.scene.fps));
    corpus.add_video(std::move(v));
    if (n >= 2) corpus.add_segment({s.video_id, s.actor_id, s.action, 0, n - 1, s.scene.fps});
  }
  return corpus;
}

inline Corpus render_corpus(const SyntheticCorpusSpec& spec) { return render_corpus(generate_scenes(spec)); }

inline SyntheticCorpusSpec parse_corpus_spec(const nlohmann::json& j) {
  static const std::set<std::string> known{"resolution", "fps",        "duration_ms", "action",     "actors",
                                           "videos_per_actor", "seed", "shape",       "size",       "motion",
                                           "foreground", "background", "scenes"};
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("synthetic spec: unknown field '" + key + "'");
  }
  SyntheticCorpusSpec spec;
  auto& p = spec.prototype;
  std::string field;
  try {
    field = "resolution";
    if (j.contains(field)) {
      p.height = j.at(field).at(0).get<int>();
      p.width = j.at(field).at(1).get<int>();
    }
    field = "fps";
    p.fps = j.value(field, p.fps);
    field = "duration_ms";
    p.duration_ms = j.value(field, p.duration_ms);
    field = "action";
    if (j.contains(field)) spec.action = parse_action(j.at(field).get<std::string>());
    field = "actors";
    spec.actors = j.value(field, spec.actors);
    field = "videos_per_actor";
    spec.videos_per_actor = j.value(field, spec.videos_per_actor);
    field = "seed";
    spec.seed = j.value(field, spec.seed);
    field = "shape";
    if (j.contains(field)) p.shape = parse_shape(j.at(field).get<std::string>());
    field = "size";
    p.size = j.value(field, p.size);
    field = "foreground";
    p.foreground = j.value(field, p.foreground);
    field = "background";
    p.background = j.value(field, p.background);
    field = "motion";
    if (j.contains(field)) {
      const auto& m = j.at(field);
      const auto kind = m.at("kind").get<std::string>();
      if (kind == "linear") {
        p.motion = MotionKind::Linear;
        p.velocity = {m.at("velocity").at(0).get<double>(), m.at("velocity").at(1).get<double>()};
      } else if (kind == "oscillate") {
        p.motion = MotionKind::Oscillating;
        p.amplitude = m.at("amplitude").get<double>();
        p.period_ms = m.at("period_ms").get<double>();
        p.axis = {1.0, 0.0};
        if (m.contains("axis")) p.axis = {m.at("axis").at(0).get<double>(), m.at("axis").at(1).get<double>()};
      } else {
        throw ConfigError("unknown motion kind '" + kind + "'");
      }
    }
    field = "scenes";
    if (j.contains(field)) spec.scenes = j.at(field).get<std::vector<SyntheticSceneSpec>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synthetic spec: field '" + field + "': " + e.what());
  } catch (const Error& e) {
    throw ConfigError("synthetic spec: field '" + field + "': " + e.what());
  }
  if (spec.actors > 0 && spec.videos_per_actor > 0) {
    // Validate the shared settings with a start position that is always legal
    // for scenes without drift; drift ranges are checked by generate_scenes.
    auto probe = p;
    probe.start = {p.width / 2.0, p.height / 2.0};
    probe.velocity = {0.0, 0.0};
    probe.amplitude = 0.0;
    probe.validate();
  }
  return spec;
}

inline nlohmann::json corpus_spec_to_json(const SyntheticCorpusSpec& spec) {
  const auto& p = spec.prototype;
  nlohmann::json j = p;
  j.erase("start");
  j["action"] = to_string(spec.action);
  j["actors"] = spec.actors;
  j["videos_per_actor"] = spec.videos_per_actor;
  j["seed"] = spec.seed;
  if (!spec.scenes.empty()) j["scenes"] = spec.scenes;
  return j;
}

}  // namespace framecast
