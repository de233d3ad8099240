// Copyright 2026 The ATS Authors
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

#include "ats/nn.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace ats {
namespace {

using ::ats::testing::MaxAbsDiff;
using ::ats::testing::RandomTensor;
using ::ats::testing::RelativeError;

constexpr ImageShape kGray8{1, 8, 8};

std::vector<ModelConfig> AllArchitectures() {
  ModelConfig sig = ModelConfig::Mlp({6}, ImageShape{1, 4, 4}, 3, 5);
  sig.activation = Activation::kSigmoid;
  return {ModelConfig::Mlp({7, 5}, ImageShape{1, 4, 4}, 3, 1),
          ModelConfig::ConvNet(ImageShape{1, 4, 4}, 3, 2),
          ModelConfig::SmallResNet(1, ImageShape{2, 4, 4}, 3, 3), sig};
}

TEST(ModelTest, InitIsDeterministic) {
  Model m(ModelConfig::ConvNet(kGray8, 10, 42));
  ModelParams a = m.Init(), b = m.Init();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.layers[i].value.ToVector(), b.layers[i].value.ToVector());
  }
  EXPECT_NE(m.Init(43).layers[0].value.ToVector(), a.layers[0].value.ToVector());
}

TEST(ModelTest, MlpLayerShapes) {
  Model m(ModelConfig::Mlp({4}, ImageShape{1, 2, 2}, 2, 0));
  ModelParams p = m.Init();
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p.layers[0].name, "fc1.weight");
  EXPECT_EQ(p.layers[0].value.shape(), (Shape{4, 4}));
  EXPECT_EQ(p.layers[2].name, "fc2.weight");
  EXPECT_EQ(p.layers[2].value.shape(), (Shape{4, 2}));
  EXPECT_EQ(p.layers[3].value.shape(), (Shape{2}));
}

TEST(ModelTest, InitialWeightSpreadMatchesFanIn) {
  // 100 x 100 hidden layer: 10k draws with fan-in 100.
  Model m(ModelConfig::Mlp({100, 100}, ImageShape{1, 10, 10}, 2, 9));
  const Tensor& w = m.Init().layers[2].value;
  ASSERT_EQ(w.numel(), 10000u);
  double mean = 0.0, sq = 0.0;
  for (double v : w.values()) mean += v;
  mean /= w.numel();
  for (double v : w.values()) sq += (v - mean) * (v - mean);
  const double std = std::sqrt(sq / w.numel());
  const double expected = std::sqrt(2.0 / 100.0);
  EXPECT_NEAR(std, expected, 0.2 * expected);
}

TEST(ModelTest, ZeroParametersGiveZeroLogits) {
  Model m(ModelConfig::ConvNet(kGray8, 4, 0));
  ModelParams p = m.Init();
  std::vector<Tensor> zeros;
  for (const auto& l : p.layers) zeros.push_back(Tensor::Zeros(l.value.shape()));
  Tensor logits = m.Forward(zeros, RandomTensor(kGray8.AsShape(), 1, 0, 1));
  EXPECT_EQ(logits.shape(), (Shape{1, 4}));
  for (double v : logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(ModelTest, IdenticalSamplesGiveIdenticalRows) {
  Model m(ModelConfig::SmallResNet(1, kGray8, 5, 3));
  ModelParams p = m.Init();
  Tensor one = RandomTensor(kGray8.AsShape(), 2, 0, 1);
  std::vector<Tensor> parts{one, one};
  Tensor batch = Reshape(Concat(parts), Shape{2, 1, 8, 8});
  Tensor logits = m.Forward(p, batch);
  auto v = logits.values();
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(v[c], v[5 + c]);
}

TEST(ModelTest, LinearModelMatchesHandMatmul) {
  Model m(ModelConfig::Mlp({}, ImageShape{1, 1, 3}, 2, 0));
  std::vector<Tensor> p = {Tensor(Shape{3, 2}, {1, -1, 0.5, 2, -3, 0.25}),
                           Tensor(Shape{2}, {0.1, -0.2})};
  Tensor x(Shape{1, 1, 3}, {0.2, 0.4, 0.6});
  Tensor logits = m.Forward(p, x);
  // [0.2, 0.4, 0.6] . W + b
  EXPECT_NEAR(logits.at(0), 0.2 * 1 + 0.4 * 0.5 - 0.6 * 3 + 0.1, 1e-12);
  EXPECT_NEAR(logits.at(1), -0.2 + 0.4 * 2 + 0.6 * 0.25 - 0.2, 1e-12);
}

TEST(ModelTest, FinalBiasGradientIsSoftmaxMinusOneHot) {
  Model m(ModelConfig::ConvNet(kGray8, 4, 7));
  ModelParams p = m.Init();
  Tensor x = RandomTensor(kGray8.AsShape(), 3, 0, 1);
  GradientVector g = m.LossGradients(p, x, Labels::Single(2));
  Tensor probs = Softmax(m.Forward(p, x));
  const Tensor& gb = g.layers.back();
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(gb.at(c), probs.at(c) - (c == 2 ? 1.0 : 0.0), 1e-12);
  }
}

TEST(ModelTest, GradientsMatchFiniteDifferencesOnEveryLayer) {
  for (const ModelConfig& cfg : AllArchitectures()) {
    Model m(cfg);
    ModelParams p = m.Init();
    Tensor x = RandomTensor(cfg.input.AsShape(), 4, 0, 1);
    GradientVector g = m.LossGradients(p, x, Labels::Single(1));
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto f = [&](const Tensor& pi) {
        std::vector<Tensor> params = p.Tensors();
        params[i] = pi;
        return m.Loss(params, x, Labels::Single(1)).item();
      };
      Tensor fd = FiniteDiffGradient(f, p.layers[i].value, 1e-5);
      EXPECT_LT(RelativeError(g.layers[i], fd, 1e-8), 1e-5)
          << p.layers[i].name << " arch " << static_cast<int>(cfg.architecture);
    }
  }
}

TEST(ModelTest, BatchGradientIsMeanOfPerSampleGradients) {
  Model m(ModelConfig::ConvNet(kGray8, 3, 8));
  ModelParams p = m.Init();
  std::vector<Tensor> xs = {RandomTensor(kGray8.AsShape(), 10, 0, 1),
                            RandomTensor(kGray8.AsShape(), 11, 0, 1),
                            RandomTensor(kGray8.AsShape(), 12, 0, 1)};
  std::vector<int> ys = {0, 2, 1};
  Tensor batch = Reshape(Concat(xs), Shape{3, 1, 8, 8});
  GradientVector gb = m.LossGradients(p, batch, Labels::Hard(ys));
  std::vector<GradientVector> per;
  for (std::size_t i = 0; i < 3; ++i) {
    per.push_back(m.LossGradients(p, xs[i], Labels::Single(ys[i])));
  }
  for (std::size_t l = 0; l < p.size(); ++l) {
    std::vector<double> mean(gb.layers[l].numel(), 0.0);
    for (const auto& g : per)
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += g.layers[l].at(k) / 3.0;
    EXPECT_LT(MaxAbsDiff(gb.layers[l].values(), mean), 1e-10);
  }
}

TEST(ModelTest, SingleSampleEqualsBatchOfOne) {
  Model m(ModelConfig::SmallResNet(1, kGray8, 3, 8));
  ModelParams p = m.Init();
  Tensor x = RandomTensor(kGray8.AsShape(), 13, 0, 1);
  GradientVector a = m.LossGradients(p, x, Labels::Single(1));
  GradientVector b =
      m.LossGradients(p, Reshape(x, Shape{1, 1, 8, 8}), Labels::Hard({1}));
  for (std::size_t l = 0; l < p.size(); ++l) {
    EXPECT_EQ(a.layers[l].ToVector(), b.layers[l].ToVector());
  }
}

TEST(ModelTest, GradientDoesNotDependOnEvaluationOrder) {
  Model m(ModelConfig::ConvNet(kGray8, 3, 8));
  ModelParams p = m.Init();
  Tensor x = RandomTensor(kGray8.AsShape(), 14, 0, 1);
  GradientVector first = m.LossGradients(p, x, Labels::Single(0));
  m.LossGradients(p, RandomTensor(kGray8.AsShape(), 15, 0, 1), Labels::Single(2));
  GradientVector again = m.LossGradients(p, x, Labels::Single(0));
  EXPECT_EQ(FlattenGrads(first).ToVector(), FlattenGrads(again).ToVector());
}

TEST(ModelTest, LossIsNonNegativeAndSoftmaxRowsSumToOne) {
  Model m(ModelConfig::Mlp({8}, kGray8, 5, 4));
  ModelParams p = m.Init();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Tensor x = RandomTensor(Shape{2, 1, 8, 8}, 100 + s, 0, 1);
    EXPECT_GE(m.Loss(p.Tensors(), x, Labels::Hard({0, 4})).item(), 0.0);
    Tensor probs = Softmax(m.Forward(p, x));
    for (std::size_t r = 0; r < 2; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < 5; ++c) acc += probs.at(r * 5 + c);
      EXPECT_NEAR(acc, 1.0, 1e-12);
    }
  }
}

TEST(ModelTest, InvalidInputsAreRejected) {
  Model m(ModelConfig::ConvNet(kGray8, 3, 0));
  ModelParams p = m.Init();
  EXPECT_THROW(m.Forward(p, Tensor::Zeros(Shape{1, 7, 8})), Error);
  EXPECT_THROW(m.LossGradients(p, Tensor::Zeros(kGray8.AsShape()), Labels::Single(3)),
               Error);
  EXPECT_THROW(Model(ModelConfig::Mlp({4}, kGray8, 1, 0)), Error);
}

TEST(FlattenGradsTest, RoundTripIsBitExact) {
  GradientVector g{{RandomTensor(Shape{2, 2}, 1), RandomTensor(Shape{3}, 2)}};
  Tensor flat = FlattenGrads(g);
  EXPECT_EQ(flat.numel(), 7u);
  GradientVector back = UnflattenGrads(flat, g);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_EQ(back.layers[l].shape(), g.layers[l].shape());
    EXPECT_EQ(back.layers[l].ToVector(), g.layers[l].ToVector());
  }
  EXPECT_THROW(UnflattenGrads(Tensor::Zeros(Shape{6}), g), Error);
}

TEST(FlattenGradsTest, DotIsLayerwiseSumOfDots) {
  GradientVector a{{RandomTensor(Shape{2, 2}, 3), RandomTensor(Shape{3}, 4)}};
  GradientVector b{{RandomTensor(Shape{2, 2}, 5), RandomTensor(Shape{3}, 6)}};
  const double whole = Dot(FlattenGrads(a), FlattenGrads(b)).item();
  const double layerwise = Dot(a.layers[0], b.layers[0]).item() +
                           Dot(a.layers[1], b.layers[1]).item();
  EXPECT_NEAR(whole, layerwise, 1e-14);
}

}  // namespace
}  // namespace ats
