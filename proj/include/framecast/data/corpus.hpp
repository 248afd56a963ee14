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
#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "framecast/data/image_io.hpp"
#include "framecast/errors.hpp"
#include "framecast/frame.hpp"
#include "framecast/model/config.hpp"

namespace framecast {

enum class ActionLabel { Walking, Jogging, Running, HandClapping, HandWaving, Boxing };

inline constexpr std::array<ActionLabel, 6> kAllActions{ActionLabel::Walking,      ActionLabel::Jogging,
                                                        ActionLabel::Running,      ActionLabel::HandClapping,
                                                        ActionLabel::HandWaving,   ActionLabel::Boxing};

inline std::string to_string(ActionLabel a) {
  switch (a) {
    case ActionLabel::Walking: return "walking";
    case ActionLabel::Jogging: return "jogging";
    case ActionLabel::Running: return "running";
    case ActionLabel::HandClapping: return "hand-clapping";
    case ActionLabel::HandWaving: return "hand-waving";
    case ActionLabel::Boxing: return "boxing";
  }
  return "?";
}

/// Accepts the canonical names plus KTH directory spellings ("handclapping")
/// and the short report headers ("clapping").
inline ActionLabel parse_action(const std::string& s) {
  static const std::map<std::string, ActionLabel> names{
      {"walking", ActionLabel::Walking},       {"jogging", ActionLabel::Jogging},
      {"running", ActionLabel::Running},       {"hand-clapping", ActionLabel::HandClapping},
      {"handclapping", ActionLabel::HandClapping}, {"clapping", ActionLabel::HandClapping},
      {"hand-waving", ActionLabel::HandWaving}, {"handwaving", ActionLabel::HandWaving},
      {"waving", ActionLabel::HandWaving},     {"boxing", ActionLabel::Boxing}};
  const auto it = names.find(s);
  if (it == names.end()) throw IngestError("unknown action label '" + s + "'");
  return it->second;
}

/// One annotated action occurrence; frame indices are inclusive.
struct ActionSegment {
  std::string video_id;
  std::string actor_id;
  ActionLabel action = ActionLabel::Walking;
  int start_frame = 0;
  int end_frame = 0;
  double fps = 25.0;

  void validate() const {
    if (!(start_frame < end_frame)) {
      throw IngestError("segment of '" + video_id + "' needs start_frame < end_frame");
    }
    if (start_frame < 0) throw IngestError("segment of '" + video_id + "' starts before frame 0");
    if (!(fps > 0.0)) throw IngestError("segment of '" + video_id + "' needs a positive fps");
  }

  friend bool operator==(const ActionSegment&, const ActionSegment&) = default;
};

struct Video {
  std::string id;
  std::string actor_id;
  ActionLabel action = ActionLabel::Walking;
  double fps = 25.0;
  std::vector<Frame> frames;
};

/// Frames and segment annotations of a set of videos, held in memory.
class Corpus {
 public:
  void add_video(Video video) {
    if (index_.contains(video.id)) throw IngestError("duplicate video id '" + video.id + "'");
    index_[video.id] = videos_.size();
    videos_.push_back(std::move(video));
  }

  void add_segment(ActionSegment segment) {
    segment.validate();
    const Video& v = video(segment.video_id);
    if (segment.end_frame >= static_cast<int>(v.frames.size())) {
      throw IngestError("segment of '" + segment.video_id + "' ends at frame " +
                        std::to_string(segment.end_frame) + " but the video has " +
                        std::to_string(v.frames.size()) + " frames");
    }
    segments_.push_back(std::move(segment));
  }

  const Video& video(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw IngestError("unknown video id '" + id + "'");
    return videos_[it->second];
  }

  const std::vector<Video>& videos() const noexcept { return videos_; }
  const std::vector<ActionSegment>& segments() const noexcept { return segments_; }

  std::vector<std::string> actor_ids() const {
    std::vector<std::string> ids;
    for (const auto& s : segments_) ids.push_back(s.actor_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  /// Keeps only segments of the given action (videos stay addressable).
  Corpus filtered(ActionLabel action) const {
    Corpus out;
    for (const auto& v : videos_) {
      if (v.action == action) out.add_video(v);
    }
    for (const auto& s : segments_) {
      if (s.action == action) out.segments_.push_back(s);
    }
    return out;
  }

  std::optional<Extent> resolution() const {
    for (const auto& v : videos_) {
      if (!v.frames.empty()) return Extent{v.frames.front().height(), v.frames.front().width()};
    }
    return std::nullopt;
  }

 private:
  std::vector<Video> videos_;
  std::vector<ActionSegment> segments_;
  std::map<std::string, std::size_t> index_;
};

inline std::string frame_file_name(int index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06d.png", index);
  return name;
}

inline std::filesystem::path video_directory(const std::filesystem::path& root, const Video& v) {
  return root / to_string(v.action) / v.actor_id / v.id;
}

inline constexpr const char* kSegmentsHeader = "video_id\tactor\taction\tstart_frame\tend_frame\tfps";

inline std::vector<ActionSegment> parse_segments(std::istream& in, const std::string& origin) {
  std::vector<ActionSegment> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("video_id", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() != 6) {
      throw IngestError(origin + ":" + std::to_string(line_no) + ": expected 6 tab-separated fields, got " +
                        std::to_string(fields.size()));
    }
    ActionSegment s;
    s.video_id = fields[0];
    s.actor_id = fields[1];
    try {
      s.action = parse_action(fields[2]);
      s.start_frame = std::stoi(fields[3]);
      s.end_frame = std::stoi(fields[4]);
      s.fps = std::stod(fields[5]);
    } catch (const IngestError& e) {
      throw IngestError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception&) {
      throw IngestError(origin + ":" + std::to_string(line_no) + ": malformed numeric field");
    }
    try {
      s.validate();
    } catch (const IngestError& e) {
      throw IngestError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_segments(std::ostream& out, const std::vector<ActionSegment>& segments) {
  out << kSegmentsHeader << '\n';
  for (const auto& s : segments) {
    char fps[32];
    std::snprintf(fps, sizeof fps, "%.17g", s.fps);
    out << s.video_id << '\t' << s.actor_id << '\t' << to_string(s.action) << '\t' << s.start_frame << '\t'
        << s.end_frame << '\t' << fps << '\n';
  }
}

/// Writes `<root>/<action>/<actor>/<video_id>/frame_%06d.png` plus segments.tsv.
inline void write_corpus(const std::filesystem::path& root, const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  for (const auto& v : corpus.videos()) {
    const auto dir = video_directory(root, v);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < v.frames.size(); ++i) write_png(dir / frame_file_name(static_cast<int>(i)), v.frames[i]);
  }
  std::ofstream out(root / "segments.tsv");
  write_segments(out, corpus.segments());
  if (!out) throw IngestError("failed writing segments.tsv under '" + root.string() + "'");
}

/// Loads a corpus written in the on-disk layout. Videos are located through
/// the segment table; frames are read in index order until the first gap.
/// With `action` set, only that action's segments and videos are loaded.
template <typename FrameTransform>
Corpus read_corpus(const std::filesystem::path& root, std::optional<ActionLabel> action,
                   FrameTransform&& transform) {
  namespace fs = std::filesystem;
  std::ifstream in(root / "segments.tsv");
  if (!in) throw IngestError("missing segments.tsv under '" + root.string() + "'");
  auto segments = parse_segments(in, (root / "segments.tsv").string());
  Corpus corpus;
  std::map<std::string, bool> loaded;
  for (const auto& s : segments) {
    if (action && s.action != *action) continue;
    if (loaded[s.video_id]) continue;
    loaded[s.video_id] = true;
    Video v{s.video_id, s.actor_id, s.action, s.fps, {}};
    const auto dir = video_directory(root, v);
    if (!fs::is_directory(dir)) throw IngestError("missing video directory '" + dir.string() + "'");
    for (int i = 0;; ++i) {
      const auto file = dir / frame_file_name(i);
      if (!fs::exists(file)) break;
      v.frames.push_back(transform(read_png(file)));
    }
    corpus.add_video(std::move(v));
  }
  for (auto& s : segments) {
    if (action && s.action != *action) continue;
    corpus.add_segment(std::move(s));
  }
  return corpus;
}

inline Corpus read_corpus(const std::filesystem::path& root, std::optional<ActionLabel> action = std::nullopt) {
  return read_corpus(root, action, [](Frame f) { return f; });
}

}  // namespace framecast
