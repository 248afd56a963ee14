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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "framecast/baseline/baseline.hpp"
#include "framecast/data/corpus.hpp"
#include "framecast/data/image_io.hpp"
#include "framecast/data/protocol.hpp"
#include "framecast/data/synthetic_corpus.hpp"
#include "framecast/data/tuples.hpp"
#include "framecast/evaluation/report.hpp"
#include "framecast/model/checkpoint.hpp"
#include "framecast/training/trainer.hpp"
#include "framecast/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace framecast;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3, kExclusions = 4 };

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  bool force = false;
  bool quiet = false;
};

struct SynthOptions {
  std::string spec;
  std::string out;
};

struct IngestOptions {
  std::string raw;
  std::string out;
  std::string action;
};

struct TrainOptions {
  std::string corpus;
  std::string out;
  std::string action;
  bool baseline = false;
  double step_ms = 40.0;
  bool resume = false;
  std::string model;
  std::string preset = "default";
  int base_channels = 4;
  int fc_width = 128;
  int time_width = 16;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  TrainConfig train;
  std::string dropout_meaning = "keep";
};

struct PredictOptions {
  std::string checkpoint;
  std::string input;
  std::vector<double> dt;
  std::string out;
};

struct RolloutOptions {
  std::string checkpoint;
  std::string input;
  int k = 5;
  std::string out;
};

struct EvaluateOptions {
  std::string checkpoint;
  std::string baseline_checkpoint;
  std::string corpus;
  std::string action;
  std::string out;
  EvalSettings settings;
  double train_fraction = 0.8;
  std::optional<std::uint64_t> split_seed;
};

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void say(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << "\n";
}

bool dir_has_entries(const fs::path& dir) { return fs::exists(dir) && !fs::is_empty(dir); }

/// Output directories must be absent or empty unless --force, which clears
/// them. The check happens before anything is written.
void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' exists and is not a directory");
  if (dir_has_entries(dir)) {
    if (!force) throw ConfigError("output directory '" + dir.string() + "' is not empty (use --force to overwrite)");
    for (const auto& e : fs::directory_iterator(dir)) fs::remove_all(e.path());
  }
  fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << text;
}

void write_manifest(const fs::path& path, const std::string& subcommand, const json& config, const json& paths,
                    const Globals& g) {
  json m{{"subcommand", subcommand},
         {"config", config},
         {"paths", paths},
         {"seed", g.seed ? json(*g.seed) : json(nullptr)},
         {"tool_version", kVersion},
         {"timestamp", now_utc()}};
  write_text(path, m.dump(2) + "\n");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

std::string dt_label(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

/// Loads an input image and brings it to the model resolution: raw 160x120
/// frames are cropped, anything else must already match.
Frame load_input(const fs::path& path, const ModelConfig& model) {
  Frame f = read_image(path);
  if (f.width() == kRawWidth && f.height() == kRawHeight && model.input_width == kCropWidth &&
      model.input_height == kRawHeight) {
    f = preprocess_frame(f);
  }
  if (f.height() != model.input_height || f.width() != model.input_width) {
    throw IngestError("input image is " + std::to_string(f.height()) + "x" + std::to_string(f.width()) +
                      ", the model expects " + std::to_string(model.input_height) + "x" +
                      std::to_string(model.input_width));
  }
  return f;
}

Corpus load_corpus(const std::string& dir, const std::string& action) {
  std::optional<ActionLabel> filter;
  if (!action.empty()) filter = parse_action(action);
  return read_corpus(dir, filter);
}

int cmd_synth(const SynthOptions& o, const Globals& g) {
  auto spec = parse_corpus_spec(read_json_file(o.spec));
  if (g.seed) spec.seed = *g.seed;
  prepare_output_dir(o.out, g.force);
  write_manifest(fs::path(o.out) / "manifest.json", "synth", {{"spec", o.spec}, {"resolved_spec", corpus_spec_to_json(spec)}},
                 {{"out", o.out}}, g);
  const auto corpus = render_corpus(spec);
  write_corpus(o.out, corpus);
  std::size_t frames = 0;
  for (const auto& v : corpus.videos()) frames += v.frames.size();
  say(g, "wrote " + std::to_string(corpus.videos().size()) + " videos, " + std::to_string(frames) + " frames");
  return kOk;
}

int cmd_ingest(const IngestOptions& o, const Globals& g) {
  if (!fs::is_directory(o.raw)) throw IngestError("raw corpus directory '" + o.raw + "' does not exist");
  prepare_output_dir(o.out, g.force);
  write_manifest(fs::path(o.out) / "manifest.json", "ingest", {{"raw", o.raw}, {"action", o.action}},
                 {{"raw", o.raw}, {"out", o.out}}, g);
  std::optional<ActionLabel> filter;
  if (!o.action.empty()) filter = parse_action(o.action);
  const auto corpus = read_corpus(o.raw, filter, preprocess_frame);
  write_corpus(o.out, corpus);
  say(g, "ingested " + std::to_string(corpus.videos().size()) + " videos");
  return kOk;
}

ModelConfig resolve_model(const TrainOptions& o, const Corpus& corpus) {
  const auto res = corpus.resolution();
  if (!res) throw IngestError("corpus holds no frames");
  ModelConfig m;
  if (!o.model.empty()) {
    m = read_json_file(o.model).get<ModelConfig>();
  } else if (o.preset == "reduced") {
    if (res->height != res->width) throw ConfigError("the reduced preset needs square frames");
    m = reduced_model_config(res->height, o.base_channels, o.fc_width, o.time_width);
  } else if (o.preset != "default") {
    throw ConfigError("unknown model preset '" + o.preset + "'");
  }
  if (m.input_height != res->height || m.input_width != res->width) {
    throw ConfigError("model resolution " + std::to_string(m.input_height) + "x" + std::to_string(m.input_width) +
                      " differs from the corpus resolution " + std::to_string(res->height) + "x" +
                      std::to_string(res->width));
  }
  if (o.baseline) m.time_branch = false;
  m.dropout_keep_probability = o.train.keep_probability();
  m.validate();
  return m;
}

int cmd_train(TrainOptions o, const Globals& g) {
  if (o.dropout_meaning != "keep" && o.dropout_meaning != "drop") {
    throw ConfigError("--dropout-meaning must be 'keep' or 'drop'");
  }
  o.train.dropout_means_keep = o.dropout_meaning == "keep";
  o.train.seed = g.seed.value_or(0);
  o.train.validate();
  const fs::path out(o.out);
  const fs::path manifest = out.string() + ".manifest.json";
  const fs::path log_path = out.string() + ".log.jsonl";
  if (fs::exists(out) && !o.resume && !g.force) {
    throw ConfigError("checkpoint '" + out.string() + "' exists (use --resume to continue or --force to overwrite)");
  }
  const auto corpus = load_corpus(o.corpus, o.action);
  const ModelConfig model = resolve_model(o, corpus);
  const auto split = make_split(corpus.actor_ids(), o.train_fraction, o.split_seed);
  const std::optional<double> exact = o.baseline ? std::optional<double>(o.step_ms) : std::nullopt;
  const TupleStream stream(corpus, split, SplitSide::Train, o.train.max_dt_ms, exact);

  json resolved{{"corpus", o.corpus},
                {"action", o.action},
                {"baseline", o.baseline},
                {"step_ms", o.step_ms},
                {"preset", o.preset},
                {"model", o.model},
                {"base_channels", o.base_channels},
                {"fc_width", o.fc_width},
                {"time_width", o.time_width},
                {"train_fraction", o.train_fraction},
                {"split_seed", o.split_seed},
                {"batch_size", o.train.batch_size},
                {"max_steps", o.train.max_steps},
                {"lr", o.train.learning_rate},
                {"adam_beta1", o.train.adam_beta1},
                {"adam_beta2", o.train.adam_beta2},
                {"adam_epsilon", o.train.adam_epsilon},
                {"dropout_rate", o.train.dropout_rate},
                {"dropout_meaning", o.dropout_meaning},
                {"checkpoint_interval", o.train.checkpoint_interval},
                {"max_dt", o.train.max_dt_ms},
                {"workers", o.train.workers},
                {"model_config", model}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_manifest(manifest, "train", resolved, {{"corpus", o.corpus}, {"checkpoint", o.out}, {"log", log_path.string()}},
                 g);

  const Network<float> net(model);
  TrainState state;
  bool resumed = false;
  if (o.resume && fs::exists(out)) {
    const auto ckpt = load_checkpoint(out, kind_of(model));
    if (!(ckpt.model == model)) throw CheckpointError("checkpoint model configuration differs from this run");
    state = restore_state(ckpt);
    resumed = true;
  } else {
    state = initial_state(net, o.train.seed);
  }
  const json extra{{"split", split},
                   {"action", o.action},
                   {"baseline_step_ms", o.baseline ? json(o.step_ms) : json(nullptr)}};
  auto save = [&](const TrainState& s) { save_checkpoint(out, make_checkpoint(s, model, o.train, extra)); };
  if (!resumed) save(state);

  std::ofstream log(log_path, resumed ? std::ios::app : std::ios::trunc);
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) {
    log << json(r).dump() << "\n";
    if (!g.quiet && r.step % 100 == 0) std::cerr << "step " << r.step << " loss " << r.loss << "\n";
  };
  hooks.on_checkpoint = save;
  hooks.should_stop = [](std::int64_t) { return g_stop.load(); };
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    state = train(std::move(state), o.train, stream, net, hooks);
  } catch (const DivergenceError& e) {
    log.flush();
    std::cerr << "error: " << e.what() << " (last good checkpoint kept at '" << out.string() << "')\n";
    return kDivergence;
  }
  save(state);
  say(g, std::string(g_stop.load() ? "stopped" : "finished") + " at step " + std::to_string(state.step));
  return kOk;
}

int cmd_predict(const PredictOptions& o, const Globals& g) {
  for (double dt : o.dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("--dt values must be positive");
  }
  const auto ckpt = load_checkpoint(o.checkpoint);
  const Frame input = load_input(o.input, ckpt.model);
  const Network<float> net(ckpt.model);
  std::optional<BaselineConfig> base;
  if (ckpt.kind() == ModelKind::Baseline) {
    const auto step = ckpt.training.value("extra", json::object()).value("baseline_step_ms", json(40.0));
    base = BaselineConfig{step.is_number() ? step.get<double>() : 40.0, ckpt.model};
    for (double dt : o.dt) {
      if (rollout_steps_for(dt, *base) == 0) {
        throw ConfigError("a baseline checkpoint predicts only multiples of " + dt_label(base->step_millis) + " ms");
      }
    }
  }
  prepare_output_dir(o.out, g.force);
  write_manifest(fs::path(o.out) / "manifest.json", "predict", {{"checkpoint", o.checkpoint}, {"input", o.input}, {"dt", o.dt}},
                 {{"out", o.out}}, g);
  for (double dt : o.dt) {
    const Frame pred = base ? baseline_predict_rollout(input, rollout_steps_for(dt, *base), ckpt.params, net).back()
                            : net.predict(input, TemporalDisplacement(dt), ckpt.params);
    write_png(fs::path(o.out) / ("pred_dt" + dt_label(dt) + "ms.png"), pred);
  }
  say(g, "wrote " + std::to_string(o.dt.size()) + " predictions");
  return kOk;
}

int cmd_rollout(const RolloutOptions& o, const Globals& g) {
  if (o.k < 1) throw ConfigError("--k must be >= 1");
  const auto ckpt = load_checkpoint(o.checkpoint, ModelKind::Baseline);
  const Frame input = load_input(o.input, ckpt.model);
  const auto step = ckpt.training.value("extra", json::object()).value("baseline_step_ms", json(40.0));
  const double step_ms = step.is_number() ? step.get<double>() : 40.0;
  prepare_output_dir(o.out, g.force);
  write_manifest(fs::path(o.out) / "manifest.json", "rollout", {{"checkpoint", o.checkpoint}, {"input", o.input}, {"k", o.k}},
                 {{"out", o.out}}, g);
  const Network<float> net(ckpt.model);
  const auto frames = baseline_predict_rollout(input, o.k, ckpt.params, net);
  for (int i = 0; i < o.k; ++i) {
    write_png(fs::path(o.out) / ("rollout_k" + std::to_string(i + 1) + "_dt" + dt_label((i + 1) * step_ms) + "ms.png"),
              frames[static_cast<std::size_t>(i)]);
  }
  say(g, "wrote " + std::to_string(o.k) + " rollout frames");
  return kOk;
}

SplitSpec split_from(const Checkpoint& ckpt, const Corpus& corpus, const EvaluateOptions& o) {
  const auto extra = ckpt.training.value("extra", json::object());
  if (!o.split_seed && extra.contains("split")) {
    SplitSpec s;
    s.train_actor_ids = extra["split"].at("train_actor_ids").get<std::set<std::string>>();
    s.test_actor_ids = extra["split"].at("test_actor_ids").get<std::set<std::string>>();
    s.train_fraction = extra["split"].at("train_fraction").get<double>();
    s.seed = extra["split"].at("seed").get<std::uint64_t>();
    return s;
  }
  return make_split(corpus.actor_ids(), o.train_fraction, o.split_seed.value_or(0));
}

int cmd_evaluate(const EvaluateOptions& o, const Globals& g) {
  const auto main_ckpt = load_checkpoint(o.checkpoint, ModelKind::TimeConditioned);
  std::optional<Checkpoint> base_ckpt;
  if (!o.baseline_checkpoint.empty()) base_ckpt = load_checkpoint(o.baseline_checkpoint, ModelKind::Baseline);
  const auto corpus = load_corpus(o.corpus, o.action);
  const auto split = split_from(main_ckpt, corpus, o);
  std::size_t test_actors = 0;
  for (const auto& a : corpus.actor_ids()) test_actors += split.is_test(a) ? 1 : 0;
  if (test_actors == 0) throw EvaluationError("the corpus has no test-side actors");

  prepare_output_dir(o.out, g.force);
  write_manifest(fs::path(o.out) / "manifest.json", "evaluate",
                 {{"checkpoint", o.checkpoint},
                  {"baseline_checkpoint", o.baseline_checkpoint},
                  {"corpus", o.corpus},
                  {"action", o.action},
                  {"evaluation", o.settings},
                  {"split", split}},
                 {{"out", o.out}}, g);

  const Network<float> main_net(main_ckpt.model);
  std::vector<MetricReport> rows;
  std::optional<Network<float>> base_net;
  if (base_ckpt) {
    base_net.emplace(base_ckpt->model);
    const auto step = base_ckpt->training.value("extra", json::object()).value("baseline_step_ms", json(40.0));
    const BaselineConfig cfg{step.is_number() ? step.get<double>() : 40.0, base_ckpt->model};
    rows.push_back(evaluate_run(rollout_predictor(*base_net, base_ckpt->params, cfg), corpus, split, o.settings));
  }
  rows.push_back(evaluate_run(time_conditioned_predictor(main_net, main_ckpt.params), corpus, split, o.settings));

  json summary = json::array();
  std::size_t excluded = 0;
  for (const auto& r : rows) {
    std::ofstream rec(fs::path(o.out) / ("records_" + r.method() + ".jsonl"));
    write_records(rec, r);
    summary.push_back(summary_json(r));
    excluded += r.excluded();
  }
  write_text(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");
  const std::string table = format_table(rows);
  const std::string header = "# " + json(o.settings).dump() + "\n";
  write_text(fs::path(o.out) / "table.txt", header + table);
  write_text(fs::path(o.out) / "table_255.txt", header + format_table(rows, 255.0 * 255.0));
  if (!g.quiet) std::cout << table;
  if (excluded > 0) {
    std::cerr << "warning: " << excluded << " samples excluded (empty edge mask)\n";
    return kExclusions;
  }
  return kOk;
}

/// Turns a JSON object of option values (or a manifest's "config") into
/// command-line tokens for every option not already given explicitly.
std::vector<std::string> config_tokens(const json& cfg, const std::vector<std::string>& given) {
  std::vector<std::string> out;
  auto present = [&](const std::string& flag) {
    for (const auto& a : given) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (present(flag)) continue;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(scalar(v));
      }
    } else if (!value.is_null() && !value.is_object()) {
      out.push_back(flag);
      out.push_back(scalar(value));
    }
  }
  return out;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  // --config FILE supplies defaults for flags not given on the command line.
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    if (file.empty()) continue;
    json cfg = read_json_file(file);
    if (cfg.contains("config") && cfg.contains("subcommand")) {
      json flat = cfg["config"];
      if (cfg.contains("seed") && !cfg["seed"].is_null()) flat["seed"] = cfg["seed"];
      cfg = flat;
    }
    if (!cfg.is_object()) throw ConfigError("--config file must hold a JSON object");
    const auto extra = config_tokens(cfg, args);
    args.insert(args.end(), extra.begin(), extra.end());
    break;
  }

  CLI::App app{"framecast: time-conditioned frame prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Globals g;
  app.add_option("--seed", g.seed, "Seed for initialization, batching and synthetic corpora");
  app.add_option("--config", g.config, "JSON file (or run manifest) with option values");
  app.add_flag("--force", g.force, "Overwrite existing outputs");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");
  app.fallthrough();

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Render a synthetic moving-shape corpus");
  synth->add_option("--spec", so.spec, "Synthetic corpus spec (JSON)")->required();
  synth->add_option("--out", so.out, "Output corpus directory")->required();

  IngestOptions io;
  auto* ingest = app.add_subcommand("ingest", "Crop a 160x120 corpus to 120x120");
  ingest->add_option("--raw", io.raw, "Raw corpus directory")->required();
  ingest->add_option("--out", io.out, "Output corpus directory")->required();
  ingest->add_option("--action", io.action, "Keep only this action");

  TrainOptions to;
  auto* trainc = app.add_subcommand("train", "Train a time-conditioned or baseline model");
  trainc->add_option("--corpus", to.corpus, "Corpus directory")->required();
  trainc->add_option("--out", to.out, "Checkpoint path")->required();
  trainc->add_option("--action", to.action, "Train on this action only");
  trainc->add_flag("--baseline", to.baseline, "Train the fixed-step baseline instead");
  trainc->add_option("--step-ms", to.step_ms, "Baseline step")->capture_default_str();
  trainc->add_flag("--resume", to.resume, "Continue from the checkpoint at --out");
  trainc->add_option("--model", to.model, "Model configuration (JSON)");
  trainc->add_option("--preset", to.preset, "default | reduced")->capture_default_str();
  trainc->add_option("--base-channels", to.base_channels, "Reduced preset channel base")->capture_default_str();
  trainc->add_option("--fc-width", to.fc_width, "Reduced preset FC width")->capture_default_str();
  trainc->add_option("--time-width", to.time_width, "Reduced preset time-branch width")->capture_default_str();
  trainc->add_option("--train-fraction", to.train_fraction, "Fraction of actors used for training")->capture_default_str();
  trainc->add_option("--split-seed", to.split_seed, "Seed of the actor split")->capture_default_str();
  trainc->add_option("--batch-size", to.train.batch_size)->capture_default_str();
  trainc->add_option("--max-steps", to.train.max_steps)->capture_default_str();
  trainc->add_option("--lr", to.train.learning_rate)->capture_default_str();
  trainc->add_option("--adam-beta1", to.train.adam_beta1)->capture_default_str();
  trainc->add_option("--adam-beta2", to.train.adam_beta2)->capture_default_str();
  trainc->add_option("--adam-epsilon", to.train.adam_epsilon)->capture_default_str();
  trainc->add_option("--dropout-rate", to.train.dropout_rate)->capture_default_str();
  trainc->add_option("--dropout-meaning", to.dropout_meaning, "keep | drop")->capture_default_str();
  trainc->add_option("--checkpoint-interval", to.train.checkpoint_interval)->capture_default_str();
  trainc->add_option("--max-dt", to.train.max_dt_ms, "Largest training displacement (ms)")->capture_default_str();
  trainc->add_option("--workers", to.train.workers)->capture_default_str();

  PredictOptions po;
  auto* predict = app.add_subcommand("predict", "Predict frames at one or more displacements");
  predict->add_option("--checkpoint", po.checkpoint)->required();
  predict->add_option("--input", po.input, "Input image (PNG or PGM)")->required();
  predict->add_option("--dt", po.dt, "Displacement in ms (repeatable)")->required()->take_all();
  predict->add_option("--out", po.out, "Output directory")->required();

  RolloutOptions ro;
  auto* rollout = app.add_subcommand("rollout", "Iterate a baseline model k times");
  rollout->add_option("--checkpoint", ro.checkpoint)->required();
  rollout->add_option("--input", ro.input)->required();
  rollout->add_option("--k", ro.k)->capture_default_str();
  rollout->add_option("--out", ro.out)->required();

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Masked-MSE evaluation on the test actors");
  evaluate->add_option("--checkpoint", eo.checkpoint, "Time-conditioned checkpoint")->required();
  evaluate->add_option("--baseline-checkpoint", eo.baseline_checkpoint, "Baseline checkpoint");
  evaluate->add_option("--corpus", eo.corpus)->required();
  evaluate->add_option("--action", eo.action);
  evaluate->add_option("--out", eo.out)->required();
  evaluate->add_option("--dt", eo.settings.displacements, "Displacements in ms")->take_all()->capture_default_str();
  evaluate->add_option("--canny-low", eo.settings.canny.low)->capture_default_str();
  evaluate->add_option("--canny-high", eo.settings.canny.high)->capture_default_str();
  evaluate->add_option("--canny-sigma", eo.settings.canny.sigma)->capture_default_str();
  evaluate->add_option("--dilation", eo.settings.canny.dilation)->capture_default_str();
  evaluate->add_option("--input-stride", eo.settings.input_stride)->capture_default_str();
  evaluate->add_option("--train-fraction", eo.train_fraction, "Split used when the checkpoint records none");
  evaluate->add_option("--split-seed", eo.split_seed, "Recompute the split instead of using the checkpoint's");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (synth->parsed()) return cmd_synth(so, g);
  if (ingest->parsed()) return cmd_ingest(io, g);
  if (trainc->parsed()) return cmd_train(to, g);
  if (predict->parsed()) return cmd_predict(po, g);
  if (rollout->parsed()) return cmd_rollout(ro, g);
  return cmd_evaluate(eo, g);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
