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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "framecast/baseline/baseline.hpp"
#include "framecast/model/checkpoint.hpp"
#include "framecast/training/trainer.hpp"
#include "test_support.hpp"

namespace fc = framecast;
namespace fs = std::filesystem;
using fc::testing::miniature_config;
using fc::testing::miniature_corpus_spec;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("framecast_training_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Fixture {
  fc::Corpus corpus = fc::render_corpus(miniature_corpus_spec());
  fc::SplitSpec split = fc::make_split(corpus.actor_ids(), 0.8, 3);
  fc::TupleStream stream{corpus, split, fc::SplitSide::Train, 200.0};
  fc::Network<float> net{miniature_config()};
};

}  // namespace

TEST(L2Loss, Examples) {
  const fc::Frame zeros(2, 2, 0.0f), ones(2, 2, 1.0f);
  EXPECT_EQ(fc::l2_loss(zeros, zeros), 0.0);
  EXPECT_EQ(fc::l2_loss(zeros, ones), 1.0);
  const fc::Frame one_hot(2, 2, std::vector<float>{1, 0, 0, 0});
  EXPECT_EQ(fc::l2_loss(zeros, one_hot), 0.25);
  EXPECT_EQ(fc::l2_loss(one_hot, zeros), 0.25);
  EXPECT_THROW(fc::l2_loss(zeros, fc::Frame(2, 3, 0.0f)), fc::ShapeError);
}

TEST(L2Loss, NetworkLossAgreesWithFrameLoss) {
  Fixture f;
  const auto params = f.net.initialize(4);
  std::mt19937_64 rng(1);
  const auto t = f.stream.draw(rng);
  const double via_frames = fc::l2_loss(f.net.predict(t.input_frame, t.dt, params), t.target_frame);
  EXPECT_NEAR(f.net.loss(t.input_frame, t.dt.millis(), t.target_frame, params), via_frames, 1e-6);
}

TEST(TrainStep, ZeroLearningRateKeepsParameters) {
  Fixture f;
  fc::TrainConfig cfg;
  cfg.learning_rate = 0.0;
  const auto s0 = fc::initial_state(f.net, 2);
  std::mt19937_64 rng(3);
  const auto batch = f.stream.batch(16, rng);
  const auto s1 = fc::train_step(s0, batch, f.net, cfg);
  EXPECT_EQ(s1.step, 1);
  EXPECT_EQ(s1.params, s0.params);
}

TEST(TrainStep, BatchMakesOneUpdateFromTheMeanGradient) {
  Fixture f;
  fc::TrainConfig cfg;
  const auto s0 = fc::initial_state(f.net, 5);
  std::mt19937_64 rng(8);
  const auto batch = f.stream.batch(16, rng);
  const auto s1 = fc::train_step(s0, batch, f.net, cfg);
  ASSERT_EQ(s1.step, 1);
  std::vector<float> mean(s0.params.size(), 0.0f);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    fc::AlignedVector<float> g(s0.params.size(), 0.0f);
    f.net.loss_and_gradient(batch[i].input_frame, batch[i].dt.millis(), batch[i].target_frame, s0.params,
                            fc::mix_seed(s0.seed, 0, 0xd0 + i), g);
    for (std::size_t k = 0; k < g.size(); ++k) mean[k] += g[k] / 16.0f;
  }
  // A first Adam step moves each coordinate by lr * g / (|g| + eps).
  std::size_t checked = 0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double expected = -cfg.learning_rate * mean[k] / (std::abs(mean[k]) + cfg.adam_epsilon);
    const double actual = static_cast<double>(s1.params.values()[k]) - s0.params.values()[k];
    EXPECT_NEAR(actual, expected, 1e-6 + 1e-3 * cfg.learning_rate) << "coordinate " << k;
    checked += std::abs(mean[k]) > 1e-6 ? 1 : 0;
  }
  EXPECT_GT(checked, mean.size() / 2);
}

TEST(TrainStep, RepeatedTupleDescends) {
  Fixture f;
  fc::TrainConfig cfg;
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    const auto t = f.stream.draw(rng);
    const std::vector<fc::SampleTuple> batch(16, t);
    const auto s0 = fc::initial_state(f.net, seed);
    const auto s1 = fc::train_step(s0, batch, f.net, cfg);
    const double before = f.net.loss(t.input_frame, t.dt.millis(), t.target_frame, s0.params);
    const double after = f.net.loss(t.input_frame, t.dt.millis(), t.target_frame, s1.params);
    successes += after <= before ? 1 : 0;
  }
  EXPECT_GE(successes, 9);
}

TEST(TrainStep, NonFiniteLossRaisesDivergence) {
  Fixture f;
  auto s = fc::initial_state(f.net, 1);
  s.step = 17;
  s.params.values()[0] = std::numeric_limits<float>::quiet_NaN();
  std::mt19937_64 rng(1);
  const auto batch = f.stream.batch(2, rng);
  try {
    fc::train_step(s, batch, f.net, fc::TrainConfig{});
    FAIL() << "expected DivergenceError";
  } catch (const fc::DivergenceError& e) {
    EXPECT_EQ(e.step(), 17);
  }
  EXPECT_THROW(fc::train_step(s, {}, f.net, fc::TrainConfig{}), fc::ConfigError);
}

TEST(TrainStep, WorkerCountDoesNotChangeResult) {
  Fixture f;
  fc::TrainConfig one, four;
  four.workers = 4;
  const auto s0 = fc::initial_state(f.net, 6);
  std::mt19937_64 rng(2);
  const auto batch = f.stream.batch(16, rng);
  EXPECT_EQ(fc::train_step(s0, batch, f.net, one), fc::train_step(s0, batch, f.net, four));
}

TEST(Train, ZeroStepsReturnsInitialState) {
  Fixture f;
  fc::TrainConfig cfg;
  cfg.max_steps = 0;
  const auto s0 = fc::initial_state(f.net, 9);
  EXPECT_EQ(fc::train(s0, cfg, f.stream, f.net), s0);
}

TEST(Train, RejectsKeepProbabilityMismatch) {
  Fixture f;
  fc::TrainConfig cfg;
  cfg.dropout_means_keep = false;
  EXPECT_THROW(fc::train(fc::initial_state(f.net, 1), cfg, f.stream, f.net), fc::ConfigError);
}

TEST(Train, InterruptAndResumeIsBitIdentical) {
  Fixture f;
  const auto dir = scratch_dir("resume");
  fc::TrainConfig cfg;
  cfg.max_steps = 100;
  cfg.seed = 21;
  cfg.checkpoint_interval = 25;
  const auto straight = fc::train(fc::initial_state(f.net, 21), cfg, f.stream, f.net);

  fc::TrainHooks hooks;
  hooks.should_stop = [](std::int64_t step) { return step >= 50; };
  hooks.on_checkpoint = [&](const fc::TrainState& s) {
    fc::save_checkpoint(dir / "last.ckpt", fc::make_checkpoint(s, f.net.config(), cfg));
  };
  const auto stopped = fc::train(fc::initial_state(f.net, 21), cfg, f.stream, f.net, hooks);
  ASSERT_EQ(stopped.step, 50);
  const auto restored = fc::restore_state(fc::load_checkpoint(dir / "last.ckpt"));
  EXPECT_EQ(restored, stopped);
  const auto resumed = fc::train(restored, cfg, f.stream, f.net);
  EXPECT_EQ(resumed.step, 100);
  EXPECT_EQ(resumed.params, straight.params);
  EXPECT_EQ(resumed.adam_m, straight.adam_m);
  EXPECT_EQ(resumed.adam_v, straight.adam_v);
}

TEST(Train, FixedSeedRunsWriteIdenticalCheckpoints) {
  Fixture f;
  const auto dir = scratch_dir("determinism");
  fc::TrainConfig cfg;
  cfg.max_steps = 30;
  cfg.seed = 4;
  for (const char* name : {"a.ckpt", "b.ckpt"}) {
    const auto s = fc::train(fc::initial_state(f.net, 4), cfg, f.stream, f.net);
    fc::save_checkpoint(dir / name, fc::make_checkpoint(s, f.net.config(), cfg));
  }
  EXPECT_EQ(file_bytes(dir / "a.ckpt"), file_bytes(dir / "b.ckpt"));
}

TEST(Train, MovingSquareLossHalvesWithinTwoThousandSteps) {
  Fixture f;
  fc::TrainConfig cfg;
  cfg.max_steps = 2000;
  cfg.seed = 1;
  cfg.learning_rate = 1e-3;
  std::vector<double> losses;
  fc::TrainHooks hooks;
  hooks.on_step = [&](const fc::StepRecord& r) { losses.push_back(r.loss); };
  fc::train(fc::initial_state(f.net, 1), cfg, f.stream, f.net, hooks);
  ASSERT_EQ(losses.size(), 2000u);
  const auto window = [&](std::size_t end) {
    double s = 0.0;
    for (std::size_t i = end - 10; i < end; ++i) s += losses[i];
    return s / 10.0;
  };
  EXPECT_LE(window(2000), 0.5 * window(10)) << "start " << window(10) << " end " << window(2000);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  Fixture f;
  const auto dir = scratch_dir("roundtrip");
  fc::TrainConfig cfg;
  cfg.max_steps = 3;
  const auto s = fc::train(fc::initial_state(f.net, 2), cfg, f.stream, f.net);
  fc::save_checkpoint(dir / "a.ckpt", fc::make_checkpoint(s, f.net.config(), cfg));
  const auto loaded = fc::load_checkpoint(dir / "a.ckpt", fc::ModelKind::TimeConditioned);
  EXPECT_EQ(loaded.params, s.params);
  EXPECT_EQ(loaded.model, f.net.config());
  EXPECT_EQ(loaded.training.at("config").get<fc::TrainConfig>(), cfg);
  fc::save_checkpoint(dir / "b.ckpt", loaded);
  EXPECT_EQ(file_bytes(dir / "a.ckpt"), file_bytes(dir / "b.ckpt"));

  fc::Checkpoint inference{f.net.config(), {}, s.params, {}, {}};
  fc::save_checkpoint(dir / "c.ckpt", inference);
  const auto c = fc::load_checkpoint(dir / "c.ckpt");
  EXPECT_TRUE(c.adam_m.empty());
  EXPECT_THROW(fc::restore_state(c), fc::CheckpointError);
}

TEST(Checkpoint, KindMismatchIsRejected) {
  const auto dir = scratch_dir("kind");
  const fc::Network<float> main_net(miniature_config());
  const fc::Network<float> base_net(fc::BaselineConfig::baseline_model(miniature_config()));
  fc::save_checkpoint(dir / "main.ckpt", {main_net.config(), {}, main_net.initialize(1), {}, {}});
  fc::save_checkpoint(dir / "base.ckpt", {base_net.config(), {}, base_net.initialize(1), {}, {}});
  EXPECT_THROW(fc::load_checkpoint(dir / "main.ckpt", fc::ModelKind::Baseline), fc::CheckpointError);
  EXPECT_THROW(fc::load_checkpoint(dir / "base.ckpt", fc::ModelKind::TimeConditioned), fc::CheckpointError);
  EXPECT_EQ(fc::load_checkpoint(dir / "base.ckpt", fc::ModelKind::Baseline).kind(), fc::ModelKind::Baseline);
}

TEST(Checkpoint, ShapeAuditAndCorruption) {
  const auto dir = scratch_dir("audit");
  const fc::Network<float> net(miniature_config());
  auto other = miniature_config();
  other.encoder_channels = {3, 2, 2};
  EXPECT_THROW(fc::save_checkpoint(dir / "x.ckpt", {other, {}, net.initialize(1), {}, {}}), fc::ShapeError);

  fc::save_checkpoint(dir / "a.ckpt", {net.config(), {}, net.initialize(1), {}, {}});
  auto bytes = file_bytes(dir / "a.ckpt");
  const std::string from = "\"encoder_channels\":[2,2,2]";
  const auto pos = bytes.find(from);
  ASSERT_NE(pos, std::string::npos);
  bytes.replace(pos, from.size(), "\"encoder_channels\":[3,2,2]");
  std::ofstream(dir / "b.ckpt", std::ios::binary) << bytes;
  EXPECT_THROW(fc::load_checkpoint(dir / "b.ckpt"), fc::ShapeError);

  std::ofstream(dir / "c.ckpt", std::ios::binary) << file_bytes(dir / "a.ckpt").substr(0, 200);
  EXPECT_THROW(fc::load_checkpoint(dir / "c.ckpt"), fc::CheckpointError);
  std::ofstream(dir / "d.ckpt", std::ios::binary) << "not a checkpoint";
  EXPECT_THROW(fc::load_checkpoint(dir / "d.ckpt"), fc::CheckpointError);
}

TEST(Baseline, RolloutCountsAndPrefix) {
  const fc::BaselineConfig cfg{40.0, fc::BaselineConfig::baseline_model(miniature_config())};
  const fc::Network<float> net(cfg.model);
  const auto params = net.initialize(3);
  std::mt19937_64 rng(4);
  const auto frame = fc::testing::random_frame(16, 16, rng);
  net.counters().reset();
  const auto five = fc::baseline_predict_rollout(frame, 5, params, net);
  EXPECT_EQ(five.size(), 5u);
  EXPECT_EQ(net.counters().encoder.load(), 5u);
  EXPECT_EQ(net.counters().decoder.load(), 5u);
  for (int j = 1; j <= 5; ++j) {
    const auto prefix = fc::baseline_predict_rollout(frame, j, params, net);
    for (int i = 0; i < j; ++i) EXPECT_EQ(prefix[i], five[i]);
  }
  EXPECT_EQ(fc::baseline_predict_rollout(frame, 1, params, net).front(), net.predict_next(frame, params));
  EXPECT_THROW(fc::baseline_predict_rollout(frame, 0, params, net), fc::DomainError);
  EXPECT_EQ(fc::rollout_steps_for(200.0, cfg), 5);
  EXPECT_EQ(fc::rollout_steps_for(60.0, cfg), 0);
}

TEST(Baseline, ZeroNetworkIsAFixedPoint) {
  const fc::Network<float> net(fc::BaselineConfig::baseline_model(miniature_config()));
  const auto zero = net.zero_parameters();
  const fc::Frame frame(16, 16, 0.3f);
  for (const auto& out : fc::baseline_predict_rollout(frame, 4, zero, net)) EXPECT_EQ(out, fc::Frame(16, 16, 0.5f));
  EXPECT_THROW(net.predict(frame, fc::TemporalDisplacement(40.0), zero), fc::ConfigError);
}

TEST(Baseline, TrainsOnFixedStepTuplesOnly) {
  const auto corpus = fc::render_corpus(miniature_corpus_spec());
  const auto split = fc::make_split(corpus.actor_ids(), 0.8, 3);
  const fc::TupleStream stream(corpus, split, fc::SplitSide::Train, 200.0, 40.0);
  const fc::Network<float> net(fc::BaselineConfig::baseline_model(miniature_config()));
  fc::TrainConfig cfg;
  cfg.max_steps = 5;
  std::mt19937_64 rng(1);
  for (const auto& t : stream.batch(100, rng)) EXPECT_EQ(t.dt.millis(), 40.0);
  const auto s = fc::train(fc::initial_state(net, 1), cfg, stream, net);
  EXPECT_EQ(s.step, 5);
}
