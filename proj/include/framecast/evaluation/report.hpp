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
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "framecast/baseline/baseline.hpp"
#include "framecast/data/corpus.hpp"
#include "framecast/data/protocol.hpp"
#include "framecast/data/tuples.hpp"
#include "framecast/evaluation/edges.hpp"
#include "framecast/model/network.hpp"

namespace framecast {

/// One scored (or excluded) prediction.
struct SampleRecord {
  std::string source_id;
  ActionLabel action = ActionLabel::Walking;
  double dt_millis = 0.0;
  std::optional<double> mse;  // empty when the groundtruth mask was empty

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Aggregate {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return count ? sum / static_cast<double>(count) : std::nan(""); }
};

/// Per-sample masked-MSE records and their aggregates. Records are kept in
/// canonical order so merging partial reports in any grouping gives identical
/// aggregates.
class MetricReport {
 public:
  MetricReport() = default;
  explicit MetricReport(std::string method, nlohmann::json settings = nlohmann::json::object())
      : method_(std::move(method)), settings_(std::move(settings)) {}

  const std::string& method() const noexcept { return method_; }
  const nlohmann::json& settings() const noexcept { return settings_; }
  const std::vector<SampleRecord>& records() const noexcept { return records_; }

  void add(SampleRecord r) {
    const auto pos = std::upper_bound(records_.begin(), records_.end(), r, before);
    records_.insert(pos, std::move(r));
  }

  void merge(const MetricReport& other) {
    for (const auto& r : other.records_) add(r);
  }

  std::size_t scored() const { return grand().count; }
  std::size_t excluded() const {
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) { return !r.mse; }));
  }

  Aggregate grand() const {
    Aggregate a;
    for (const auto& r : records_) accumulate(a, r);
    return a;
  }

  std::map<ActionLabel, Aggregate> per_action() const {
    std::map<ActionLabel, Aggregate> out;
    for (const auto& r : records_) {
      if (r.mse) accumulate(out[r.action], r);
    }
    return out;
  }

  std::map<double, Aggregate> per_dt() const {
    std::map<double, Aggregate> out;
    for (const auto& r : records_) {
      if (r.mse) accumulate(out[r.dt_millis], r);
    }
    return out;
  }

  /// Average of the per-action means, the summary column of the table.
  std::optional<double> action_average() const {
    const auto actions = per_action();
    if (actions.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [_, a] : actions) sum += a.mean();
    return sum / static_cast<double>(actions.size());
  }

 private:
  static bool before(const SampleRecord& a, const SampleRecord& b) {
    if (a.source_id != b.source_id) return a.source_id < b.source_id;
    return a.dt_millis < b.dt_millis;
  }
  static void accumulate(Aggregate& a, const SampleRecord& r) {
    if (!r.mse) return;
    a.sum += *r.mse;
    ++a.count;
  }

  std::string method_;
  nlohmann::json settings_ = nlohmann::json::object();
  std::vector<SampleRecord> records_;
};

/// Mean of plain values, used for the single-action example arithmetic.
inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw EvaluationError("mean of an empty list");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// A frame predictor under evaluation, addressed by displacement.
struct Predictor {
  std::string method;
  Extent resolution;
  std::function<Frame(const Frame&, double)> predict;
};

inline Predictor time_conditioned_predictor(const Network<float>& net, const ModelParameters<float>& params,
                                            std::string method = "ours") {
  return {std::move(method), Extent{net.config().input_height, net.config().input_width},
          [&net, &params](const Frame& f, double dt) { return net.predict(f, TemporalDisplacement(dt), params); }};
}

inline Predictor rollout_predictor(const Network<float>& net, const ModelParameters<float>& params,
                                   const BaselineConfig& cfg, std::string method = "baseline") {
  return {std::move(method), Extent{net.config().input_height, net.config().input_width},
          [&net, &params, cfg](const Frame& f, double dt) {
            const int k = rollout_steps_for(dt, cfg);
            if (k == 0) {
              throw EvaluationError("displacement " + std::to_string(dt) + " ms is not a multiple of the baseline step");
            }
            return baseline_predict_rollout(f, k, params, net).back();
          }};
}

struct EvalSettings {
  std::vector<double> displacements{40, 80, 120, 160, 200};
  CannySettings canny;
  /// Use every n-th admissible input frame of a segment.
  int input_stride = 1;
};

inline void to_json(nlohmann::json& j, const EvalSettings& s) {
  j = nlohmann::json{{"displacements_ms", s.displacements}, {"canny", s.canny}, {"input_stride", s.input_stride}};
}

/// Scores every test-side input frame at every displacement that lands on a
/// frame of the same segment.
inline MetricReport evaluate_run(const Predictor& predictor, const Corpus& corpus, const SplitSpec& split,
                                 const EvalSettings& settings) {
  settings.canny.validate();
  if (settings.input_stride < 1) throw ConfigError("input_stride must be >= 1");
  if (settings.displacements.empty()) throw ConfigError("no displacements requested");
  for (double dt : settings.displacements) {
    if (!(dt > 0.0)) throw ConfigError("displacements must be positive");
  }
  if (split.test_actor_ids.empty()) throw EvaluationError("the test side has no actors");
  if (const auto res = corpus.resolution(); res && (res->height != predictor.resolution.height ||
                                                    res->width != predictor.resolution.width)) {
    throw EvaluationError("corpus resolution differs from the model resolution");
  }
  MetricReport report(predictor.method, nlohmann::json{{"evaluation", settings}, {"method", predictor.method}});
  std::size_t segments = 0;
  for (const auto& seg : corpus.segments()) {
    if (!split.is_test(seg.actor_id)) continue;
    ++segments;
    const Video& v = corpus.video(seg.video_id);
    for (double dt : settings.displacements) {
      const double k = dt * seg.fps / 1000.0;
      const long offset = std::lround(k);
      if (offset < 1 || std::abs(k - static_cast<double>(offset)) > 1e-9) continue;
      for (int i = seg.start_frame; i + offset <= seg.end_frame; i += settings.input_stride) {
        const int target = i + static_cast<int>(offset);
        const SourceId id{seg.video_id, seg.actor_id, seg.action, i, target, seg.fps};
        const Frame& truth = v.frames.at(static_cast<std::size_t>(target));
        const auto mask = edge_mask(truth, settings.canny);
        SampleRecord rec{id.to_string(), seg.action, dt, std::nullopt};
        if (!mask.empty()) rec.mse = masked_mse(truth, predictor.predict(v.frames.at(static_cast<std::size_t>(i)), dt), mask);
        report.add(std::move(rec));
      }
    }
  }
  if (segments == 0) throw EvaluationError("no test-side segments in the corpus");
  return report;
}

inline constexpr std::array<ActionLabel, 6> kTableOrder{ActionLabel::Jogging,      ActionLabel::Running,
                                                        ActionLabel::Walking,      ActionLabel::HandClapping,
                                                        ActionLabel::HandWaving,   ActionLabel::Boxing};

inline std::string table_header(ActionLabel a) {
  switch (a) {
    case ActionLabel::Jogging: return "Jogging";
    case ActionLabel::Running: return "Running";
    case ActionLabel::Walking: return "Walking";
    case ActionLabel::HandClapping: return "Clapping";
    case ActionLabel::HandWaving: return "Waving";
    case ActionLabel::Boxing: return "Boxing";
  }
  return "?";
}

/// Method-by-action table: six action columns and the average of the action
/// means. `scale` multiplies every value (255^2 maps to 8-bit intensities).
inline std::string format_table(const std::vector<MetricReport>& rows, double scale = 1.0) {
  auto cell = [](std::optional<double> v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  std::size_t method_width = 6;
  for (const auto& r : rows) method_width = std::max(method_width, r.method().size());
  std::string out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string head = "Method";
  head.append(method_width - head.size(), ' ');
  for (auto a : kTableOrder) head += " " + pad(table_header(a), 10);
  out += head + " " + pad("Avg", 10) + "\n";
  for (const auto& r : rows) {
    std::string line = r.method();
    line.append(method_width - line.size(), ' ');
    const auto actions = r.per_action();
    for (auto a : kTableOrder) {
      const auto it = actions.find(a);
      line += " " + pad(cell(it == actions.end() ? std::nullopt : std::optional<double>(it->second.mean() * scale)), 10);
    }
    const auto avg = r.action_average();
    line += " " + pad(cell(avg ? std::optional<double>(*avg * scale) : std::nullopt), 10);
    out += line + "\n";
  }
  return out;
}

/// Line-delimited records: a settings header, then one object per sample.
inline void write_records(std::ostream& out, const MetricReport& r) {
  out << nlohmann::json{{"settings", r.settings()}, {"method", r.method()}}.dump() << "\n";
  for (const auto& s : r.records()) {
    nlohmann::json j{{"source_id", s.source_id}, {"action", to_string(s.action)}, {"dt_ms", s.dt_millis}};
    j["masked_mse"] = s.mse ? nlohmann::json(*s.mse) : nlohmann::json(nullptr);
    j["masked_mse_255"] = s.mse ? nlohmann::json(*s.mse * 255.0 * 255.0) : nlohmann::json(nullptr);
    j["excluded"] = !s.mse;
    out << j.dump() << "\n";
  }
}

inline nlohmann::json summary_json(const MetricReport& r) {
  nlohmann::json actions = nlohmann::json::object();
  for (const auto& [a, agg] : r.per_action()) actions[to_string(a)] = {{"mean", agg.mean()}, {"count", agg.count}};
  nlohmann::json dts = nlohmann::json::object();
  for (const auto& [dt, agg] : r.per_dt()) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", dt);
    dts[key] = {{"mean", agg.mean()}, {"count", agg.count}};
  }
  const auto g = r.grand();
  const auto avg = r.action_average();
  return {{"method", r.method()},
          {"settings", r.settings()},
          {"per_action", actions},
          {"per_dt", dts},
          {"grand_mean", g.count ? nlohmann::json(g.mean()) : nlohmann::json(nullptr)},
          {"action_average", avg ? nlohmann::json(*avg) : nlohmann::json(nullptr)},
          {"action_average_255", avg ? nlohmann::json(*avg * 255.0 * 255.0) : nlohmann::json(nullptr)},
          {"scored", g.count},
          {"excluded", r.excluded()}};
}

}  // namespace framecast
