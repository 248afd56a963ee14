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

#include <random>

#include "framecast/model/network.hpp"
#include "test_support.hpp"

namespace framecast {
namespace {

using testing::miniature_config;
using testing::random_frame;

ModelConfig small_config(int resolution) { return reduced_model_config(resolution, 2, 16, 4); }

TEST(ModelConfigTest, DefaultsGiveEmbeddingOf4160) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.flatten_size(), 7200);
  EXPECT_EQ(c.image_embedding_size(), 4096);
  EXPECT_EQ(c.time_embedding_size(), 64);
  EXPECT_EQ(c.embedding_size(), 4160);
  const auto sizes = c.spatial_schedule();
  ASSERT_EQ(sizes.size(), 4u);
  EXPECT_EQ(sizes[0], (Extent{120, 120}));
  EXPECT_EQ(sizes[1], (Extent{60, 60}));
  EXPECT_EQ(sizes[2], (Extent{30, 30}));
  EXPECT_EQ(sizes[3], (Extent{15, 15}));
  EXPECT_EQ(c.decoder_channels(), (std::vector<int>{64, 32, 1}));
}

TEST(ModelConfigTest, HalfResolutionScheduleFloors) {
  ModelConfig c;
  c.input_height = c.input_width = 60;
  c.bottleneck_channels = 32;
  c.encoder_fc_sizes = {32 * 7 * 7, 1024};
  c.decoder_fc_sizes = {1024, 32 * 7 * 7};
  ASSERT_NO_THROW(c.validate());
  const auto sizes = c.spatial_schedule();
  EXPECT_EQ(sizes[1].height, 30);
  EXPECT_EQ(sizes[2].height, 15);
  EXPECT_EQ(sizes[3].height, 7);
}

TEST(ModelConfigTest, LayoutFollowsTheStageSchedule) {
  const auto layout = build_layout(ModelConfig{});
  std::vector<std::string> names;
  for (const auto& l : layout.layers) names.push_back(l.name);
  const std::vector<std::string> expected{
      "enc.conv0", "enc.pool0", "enc.conv1", "enc.pool1", "enc.conv2", "enc.pool2", "enc.conv3",
      "enc.fc1",   "time.fc0",  "time.fc1",  "time.fc2",  "time.fc3",  "dec.fc0",   "dec.fc1",
      "dec.unpool0", "dec.deconv0", "dec.unpool1", "dec.deconv1", "dec.unpool2", "dec.deconv2"};
  EXPECT_EQ(names, expected);
  // Kernel schedule: encoder 5,5,2,1; decoder 2,5,5.
  EXPECT_EQ(layout.layers[0].kernel, 5);
  EXPECT_EQ(layout.layers[2].kernel, 5);
  EXPECT_EQ(layout.layers[4].kernel, 2);
  EXPECT_EQ(layout.layers[6].kernel, 1);
  EXPECT_EQ(layout.layers[6].out_channels, 32);
  EXPECT_EQ(layout.layers[15].kernel, 2);
  EXPECT_EQ(layout.layers[17].kernel, 5);
  EXPECT_EQ(layout.layers[19].kernel, 5);
  EXPECT_EQ(layout.layers[7].in_channels, 7200);
  EXPECT_EQ(layout.layers[7].out_channels, 4096);
  EXPECT_EQ(layout.layers[12].in_channels, 4160);
  EXPECT_EQ(layout.layers[14].out.height, 30);
  EXPECT_EQ(layout.layers[16].out.height, 60);
  EXPECT_EQ(layout.layers[18].out.height, 120);
  EXPECT_EQ(layout.layers[19].activation, Activation::Sigmoid);
}

TEST(ModelConfigTest, ProjectionVariantAddsTrainableFlattenLayer) {
  ModelConfig c = small_config(32);
  c.flatten_is_first_fc = false;
  c.encoder_fc_sizes = {24, 16};
  c.decoder_fc_sizes = {16, 24};
  ASSERT_NO_THROW(c.validate());
  const auto layout = build_layout(c);
  EXPECT_NO_THROW(layout.find_slot("enc.fc_proj.weight"));
  EXPECT_NO_THROW(layout.find_slot("dec.fc_proj.weight"));
  Network<float> net(c);
  const auto params = net.initialize(1);
  std::mt19937_64 rng(1);
  const Frame out = net.predict(random_frame(32, 32, rng), TemporalDisplacement(40), params);
  EXPECT_EQ(out.height(), 32);
}

TEST(ModelConfigTest, RejectsInconsistentGeometry) {
  ModelConfig c;
  c.encoder_fc_sizes = {28800, 4096};
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.encoder_kernel_schedule = {5, 5, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.dropout_keep_probability = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.input_height = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ModelConfigTest, JsonRoundTripAndUnknownFields) {
  ModelConfig c = small_config(48);
  c.dropout_keep_probability = 0.2;
  nlohmann::json j = c;
  EXPECT_EQ(j.at("embedding_size").get<int>(), c.embedding_size());
  EXPECT_EQ(j.get<ModelConfig>(), c);
  j["encoder_chanels"] = {1, 2};
  EXPECT_THROW(j.get<ModelConfig>(), ConfigError);
}

TEST(LayersTest, ConvolutionMatchesDirectSum) {
  // Direct nested-loop convolution as the oracle for im2col + GEMM.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& [k, stride, pad, size] :
       std::vector<std::tuple<int, int, int, int>>{{5, 1, 2, 9}, {2, 2, 0, 9}, {2, 1, 0, 8}, {1, 1, 0, 5}}) {
    LayerSpec spec;
    spec.kind = LayerKind::Conv;
    spec.in_channels = 3;
    spec.out_channels = 2;
    spec.kernel = k;
    spec.stride = stride;
    spec.pad = pad;
    spec.in = {size, size};
    const int out = stride == 2 ? size / 2 : size;
    spec.out = {out, out};
    framecast::AlignedVector<double> w(2 * 3 * k * k), b(2), x(3 * size * size), y(spec.output_size()), cols;
    for (auto* v : {&w, &b, &x})
      for (double& e : *v) e = u(rng);
    layers::forward_linear<double>(spec, w, b, x, y, cols);
    for (int o = 0; o < 2; ++o)
      for (int oy = 0; oy < out; ++oy)
        for (int ox = 0; ox < out; ++ox) {
          double expect = b[o];
          for (int c = 0; c < 3; ++c)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || ix < 0 || iy >= size || ix >= size) continue;
                expect += w[((o * 3 + c) * k + ky) * k + kx] * x[(c * size + iy) * size + ix];
              }
          EXPECT_NEAR(y[(o * out + oy) * out + ox], expect, 1e-12);
        }
  }
}

TEST(LayersTest, TransposeConvolutionIsAdjointOfConvolution) {
  // <conv(x), y> == <x, conv^T(y)> with shared weights and zero biases.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& [k, stride, pad, big, small] :
       std::vector<std::tuple<int, int, int, int, int>>{{2, 2, 0, 15, 7}, {5, 1, 2, 8, 8}, {2, 1, 0, 6, 6}}) {
    LayerSpec c;
    c.kind = LayerKind::Conv;
    c.in_channels = 2;
    c.out_channels = 3;
    c.in = {big, big};
    c.out = {small, small};
    c.kernel = k;
    c.stride = stride;
    c.pad = pad;
    LayerSpec t = c;
    t.kind = LayerKind::TransposeConv;
    t.in_channels = 3;
    t.out_channels = 2;
    t.in = c.out;
    t.out = c.in;
    // conv weight [3,2,k,k]; transpose weight [3,2,k,k] read as [in=3][out=2].
    framecast::AlignedVector<double> w(3 * 2 * k * k), zero3(3, 0.0), zero2(2, 0.0);
    framecast::AlignedVector<double> x(c.input_size()), y(c.output_size()), cx(c.output_size()), ty(t.output_size()), cols;
    for (auto* v : {&w, &x, &y})
      for (double& e : *v) e = u(rng);
    layers::forward_linear<double>(c, w, zero3, x, cx, cols);
    layers::forward_linear<double>(t, w, zero2, y, ty, cols);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += cx[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * ty[i];
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(NetworkTest, DefaultConfigShapes) {
  Network<float> net{ModelConfig{}};
  const auto params = net.initialize(42);
  std::mt19937_64 rng(1);
  const Frame frame = random_frame(120, 120, rng);
  const auto image = net.encode_image(frame, params);
  EXPECT_EQ(image.size(), 4096u);
  const auto time = net.encode_time(TemporalDisplacement(40), params);
  EXPECT_EQ(time.size(), 64u);
  const auto embedding = Network<float>::concatenate(image, time);
  EXPECT_EQ(embedding.size(), 4160u);
  const Frame out = net.decode(embedding, params);
  EXPECT_EQ(out.height(), 120);
  EXPECT_EQ(out.width(), 120);
}

TEST(NetworkTest, ZeroParametersPropagateZeros) {
  Network<float> net(small_config(32));
  const auto params = net.zero_parameters();
  const auto image = net.encode_image(Frame(32, 32, 0.0f), params);
  EXPECT_TRUE(std::all_of(image.begin(), image.end(), [](float v) { return v == 0.0f; }));
  const auto time = net.encode_time(TemporalDisplacement(123.0), params);
  EXPECT_TRUE(std::all_of(time.begin(), time.end(), [](float v) { return v == 0.0f; }));
  const Frame out = net.decode(Network<float>::concatenate(image, time), params);
  EXPECT_EQ(out, Frame(32, 32, 0.5f));
}

TEST(NetworkTest, HalfResolutionRoundTripsShape) {
  ModelConfig c;
  c.input_height = c.input_width = 60;
  c.encoder_channels = {2, 2, 2};
  c.bottleneck_channels = 2;
  c.encoder_fc_sizes = {2 * 7 * 7, 32};
  c.time_branch_fc_sizes = {8, 8, 8, 8};
  c.decoder_fc_sizes = {32, 2 * 7 * 7};
  Network<float> net(c);
  const auto params = net.initialize(2);
  std::mt19937_64 rng(2);
  const Frame frame = random_frame(60, 60, rng);
  EXPECT_EQ(net.encode_image(frame, params).size(), 32u);
  const Frame out = net.predict(frame, TemporalDisplacement(80), params);
  EXPECT_EQ(out.height(), 60);
  EXPECT_EQ(out.width(), 60);
}

TEST(NetworkTest, ErrorsOnMismatchedInputs) {
  Network<float> net(small_config(32));
  const auto params = net.initialize(1);
  EXPECT_THROW(net.encode_image(Frame(16, 32), params), ConfigError);
  EXPECT_THROW(TemporalDisplacement(0.0), DomainError);
  EXPECT_THROW(TemporalDisplacement(-40.0), DomainError);
  std::vector<float> short_embedding(5);
  EXPECT_THROW(net.decode(short_embedding, params), ShapeError);
  Network<float> other(small_config(48));
  EXPECT_THROW(net.encode_image(Frame(32, 32), other.initialize(1)), ShapeError);
  EXPECT_THROW(params.audit(small_config(48)), ShapeError);
}

TEST(NetworkTest, PredictEqualsDecodeOfConcatenatedBranches) {
  Network<float> net(small_config(32));
  const auto params = net.initialize(9);
  std::mt19937_64 rng(9);
  const Frame frame = random_frame(32, 32, rng);
  const TemporalDisplacement dt(120);
  const auto image = net.encode_image(frame, params);
  const auto time = net.encode_time(dt, params);
  const auto embedding = Network<float>::concatenate(image, time);
  EXPECT_EQ(net.predict(frame, dt, params), net.decode(embedding, params));
  // Split at the image width recovers both branches exactly.
  const std::size_t split = net.config().image_embedding_size();
  EXPECT_EQ(framecast::AlignedVector<float>(embedding.begin(), embedding.begin() + split), image);
  EXPECT_EQ(framecast::AlignedVector<float>(embedding.begin() + split, embedding.end()), time);
}

TEST(NetworkTest, PredictIsOneStepAtEveryDisplacement) {
  Network<float> net(small_config(32));
  const auto params = net.initialize(4);
  const Frame frame(32, 32, 0.3f);
  for (double dt : {40.0, 80.0, 200.0, 220.0, 5000.0}) {
    net.counters().reset();
    const Frame out = net.predict(frame, TemporalDisplacement(dt), params);
    EXPECT_EQ(net.counters().encoder.load(), 1u);
    EXPECT_EQ(net.counters().decoder.load(), 1u);
    EXPECT_EQ(out.height(), 32);
  }
}

TEST(NetworkTest, RangeInvariantUnderRandomParameters) {
  Network<double> net(small_config(16));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    auto params = net.initialize(draw);
    const double scale = 1.0 + 20.0 * (draw % 5);
    for (double& v : params.values()) v = scale * n(rng);
    std::vector<double> embedding(net.config().embedding_size());
    for (double& v : embedding) v = 10.0 * n(rng);
    const Frame out = net.decode(embedding, params);
    for (float p : out.pixels()) {
      ASSERT_GE(p, 0.0f);
      ASSERT_LE(p, 1.0f);
    }
  }
}

TEST(NetworkTest, ContinuousInDisplacement) {
  Network<float> net(small_config(32));
  const auto params = net.initialize(21);
  std::mt19937_64 rng(21);
  const Frame frame = random_frame(32, 32, rng);
  for (double dt : {40.0, 100.0, 220.0}) {
    const Frame a = net.predict(frame, TemporalDisplacement(dt), params);
    const Frame b = net.predict(frame, TemporalDisplacement(dt + 1e-3), params);
    float worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
    EXPECT_LT(worst, 1e-3f);
  }
}

TEST(NetworkTest, InferenceIsDeterministicAndDropoutOnlyInTraining) {
  Network<float> net(reduced_model_config(32, 2, 128, 4));
  const auto params = net.initialize(5);
  std::mt19937_64 rng(5);
  const Frame frame = random_frame(32, 32, rng);
  EXPECT_EQ(net.predict(frame, TemporalDisplacement(80), params),
            net.predict(frame, TemporalDisplacement(80), params));
  const auto plain = net.encode_image(frame, params);
  EXPECT_EQ(plain, net.encode_image(frame, params));
  const auto dropped_a = net.encode_image(frame, params, 1);
  const auto dropped_b = net.encode_image(frame, params, 2);
  EXPECT_NE(dropped_a, plain);
  EXPECT_NE(dropped_a, dropped_b);
  EXPECT_EQ(dropped_a, net.encode_image(frame, params, 1));
}

TEST(GradientTest, MatchesCentralDifferences) {
  Network<double> net(miniature_config());
  std::mt19937_64 rng(17);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto params = testing::generic_parameters(net, seed);
    const Frame input = random_frame(16, 16, rng);
    const Frame target = random_frame(16, 16, rng);
    const auto result = testing::gradient_check(net, params, input, 80.0 + 40.0 * seed, target, std::nullopt,
                                                400, seed);
    EXPECT_GE(result.pass_fraction(), 0.95) << "seed " << seed << " worst " << result.worst_relative;
  }
}

TEST(GradientTest, MatchesCentralDifferencesWithFixedDropoutMask) {
  Network<double> net(miniature_config());
  std::mt19937_64 rng(19);
  const auto params = testing::generic_parameters(net, 7);
  const Frame input = random_frame(16, 16, rng);
  const Frame target = random_frame(16, 16, rng);
  const auto result = testing::gradient_check(net, params, input, 120.0, target, 99u, 400, 7);
  EXPECT_GE(result.pass_fraction(), 0.95) << "worst " << result.worst_relative;
}

TEST(GradientTest, BaselineNetworkGradients) {
  ModelConfig c = miniature_config();
  c.time_branch = false;
  Network<double> net(c);
  std::mt19937_64 rng(23);
  const auto result = testing::gradient_check(net, testing::generic_parameters(net, 3), random_frame(16, 16, rng), 40.0,
                                              random_frame(16, 16, rng), std::nullopt, 300, 3);
  EXPECT_GE(result.pass_fraction(), 0.95) << "worst " << result.worst_relative;
}

}  // namespace
}  // namespace framecast
