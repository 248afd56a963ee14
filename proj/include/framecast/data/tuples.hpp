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
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "framecast/data/corpus.hpp"
#include "framecast/data/protocol.hpp"
#include "framecast/frame.hpp"

namespace framecast {

/// Where a training tuple came from; enough to recompute its displacement.
struct SourceId {
  std::string video_id;
  std::string actor_id;
  ActionLabel action = ActionLabel::Walking;
  int input_index = 0;
  int target_index = 0;
  double fps = 25.0;

  double dt_millis() const { return frame_time(target_index - input_index, fps); }

  /// "video|actor|action|input|target|fps"
  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << video_id << '|' << actor_id << '|' << framecast::to_string(action) << '|' << input_index << '|'
       << target_index << '|' << fps;
    return os.str();
  }

  static SourceId parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, '|')) parts.push_back(p);
    if (parts.size() != 6) throw IngestError("malformed source id '" + text + "'");
    SourceId id;
    id.video_id = parts[0];
    id.actor_id = parts[1];
    id.action = parse_action(parts[2]);
    id.input_index = std::stoi(parts[3]);
    id.target_index = std::stoi(parts[4]);
    id.fps = std::stod(parts[5]);
    return id;
  }

  friend bool operator==(const SourceId&, const SourceId&) = default;
};

/// One {input frame, dt, target frame} training triple; the input sits at
/// relative time zero.
struct SampleTuple {
  Frame input_frame;
  TemporalDisplacement dt;
  Frame target_frame;
  SourceId source;
};

/// Samples (input, target) frame pairs uniformly over every admissible pair:
/// both frames from one segment of an actor on the requested split side, with
/// a frame offset of at least one and a displacement of at most `max_dt_ms`.
/// With `exact_dt_ms`, only pairs at exactly that displacement qualify.
///
/// A stream is a per-consumer object; draws are a pure function of the
/// supplied engine state.
class TupleStream {
 public:
  TupleStream(const Corpus& corpus, const SplitSpec& split, SplitSide side, double max_dt_ms,
              std::optional<double> exact_dt_ms = std::nullopt)
      : corpus_(&corpus) {
    for (const auto& seg : corpus.segments()) {
      const bool on_side = side == SplitSide::Train ? split.is_train(seg.actor_id) : split.is_test(seg.actor_id);
      if (!on_side) continue;
      const double interval = 1000.0 / seg.fps;
      if (max_dt_ms < interval - 1e-9) {
        throw StreamError("max_dt " + std::to_string(max_dt_ms) + " ms is below one frame interval (" +
                          std::to_string(interval) + " ms) of '" + seg.video_id + "'");
      }
      Entry e{&seg, static_cast<int>(std::floor(max_dt_ms * seg.fps / 1000.0 + 1e-9)), 0, 0};
      if (exact_dt_ms) {
        const double k = *exact_dt_ms * seg.fps / 1000.0;
        const int offset = static_cast<int>(std::lround(k));
        if (offset < 1 || std::abs(k - offset) > 1e-9) {
          throw StreamError("displacement " + std::to_string(*exact_dt_ms) + " ms is not a whole number of frames of '" +
                            seg.video_id + "'");
        }
        e.exact_offset = offset;
      }
      e.pairs = count_pairs(e);
      if (e.pairs == 0) continue;
      total_ += e.pairs;
      entries_.push_back(e);
      cumulative_.push_back(total_);
    }
    if (entries_.empty()) {
      throw StreamError(std::string("no admissible tuples on the ") + (side == SplitSide::Train ? "train" : "test") +
                        " side");
    }
  }

  std::size_t admissible_pairs() const noexcept { return total_; }

  SampleTuple draw(std::mt19937_64& rng) const {
    const std::size_t r = static_cast<std::size_t>(rng() % total_);
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), r) -
                                                   cumulative_.begin());
    const std::size_t local = r - (k == 0 ? 0 : cumulative_[k - 1]);
    const auto [input, target] = decode_pair(entries_[k], local);
    return make_tuple(*entries_[k].segment, input, target);
  }

  std::vector<SampleTuple> batch(std::size_t size, std::mt19937_64& rng) const {
    std::vector<SampleTuple> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) out.push_back(draw(rng));
    return out;
  }

  /// Visits every admissible (segment, input index, target index).
  template <typename Visitor>
  void for_each_pair(Visitor&& visit) const {
    for (const auto& e : entries_) {
      for (std::size_t i = 0; i < e.pairs; ++i) {
        const auto [input, target] = decode_pair(e, i);
        visit(*e.segment, input, target);
      }
    }
  }

  SampleTuple make_tuple(const ActionSegment& seg, int input, int target) const {
    const Video& v = corpus_->video(seg.video_id);
    SourceId id{seg.video_id, seg.actor_id, seg.action, input, target, seg.fps};
    return SampleTuple{v.frames.at(input), TemporalDisplacement(id.dt_millis()), v.frames.at(target), std::move(id)};
  }

 private:
  struct Entry {
    const ActionSegment* segment;
    int max_offset;
    std::size_t pairs;
    int exact_offset;
  };

  static std::size_t count_pairs(const Entry& e) {
    const int length = e.segment->end_frame - e.segment->start_frame + 1;
    if (e.exact_offset > 0) {
      return e.exact_offset <= std::min(e.max_offset, length - 1) ? static_cast<std::size_t>(length - e.exact_offset)
                                                                    : 0;
    }
    std::size_t n = 0;
    for (int d = 1; d <= std::min(e.max_offset, length - 1); ++d) n += static_cast<std::size_t>(length - d);
    return n;
  }

  static std::pair<int, int> decode_pair(const Entry& e, std::size_t local) {
    const int start = e.segment->start_frame;
    const int length = e.segment->end_frame - start + 1;
    if (e.exact_offset > 0) {
      const int i = start + static_cast<int>(local);
      return {i, i + e.exact_offset};
    }
    for (int d = 1;; ++d) {
      const auto count = static_cast<std::size_t>(length - d);
      if (local < count) {
        const int i = start + static_cast<int>(local);
        return {i, i + d};
      }
      local -= count;
    }
  }

  const Corpus* corpus_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> cumulative_;
  std::size_t total_ = 0;
};

}  // namespace framecast
