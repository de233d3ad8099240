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

#include "ats/attack.h"

#include <cmath>
#include <vector>

#include "ats/dataset.h"
#include "ats/metrics.h"
#include "ats/optim.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace ats {
namespace {

using ::ats::testing::RandomTensor;
using ::ats::testing::RelativeError;

GradientVector MakeGrad(std::vector<std::vector<double>> layers) {
  GradientVector g;
  for (auto& l : layers) {
    const std::size_t n = l.size();
    g.layers.emplace_back(Shape{n}, std::move(l));
  }
  return g;
}

TEST(GradientDistanceTest, Examples) {
  const GradientVector g = MakeGrad({{0.5, -1.0, 2.0}, {3.0, 0.25, -0.75, 1.5}});
  GradientVector shifted = g;
  for (auto& l : shifted.layers) l = AddScalar(l, 1.0);
  EXPECT_NEAR(GradientDistance(g, g, DistanceKind::kCosine).item(), 0.0, 1e-15);
  EXPECT_NEAR(GradientDistance(g, shifted, DistanceKind::kL2).item(), 7.0, 1e-12);
  EXPECT_NEAR(GradientDistance(g, shifted, DistanceKind::kL1).item(), 7.0, 1e-12);
  GradientVector doubled = g;
  for (auto& l : doubled.layers) l = Scale(l, 2.0);
  EXPECT_NEAR(GradientDistance(g, doubled, DistanceKind::kCosine).item(), 0.0,
              1e-15);
}

TEST(GradientDistanceTest, CosineOrthogonalIsOne) {
  const GradientVector a = MakeGrad({{1.0, 0.0}, {0.0}});
  const GradientVector b = MakeGrad({{0.0, 1.0}, {0.0}});
  EXPECT_NEAR(GradientDistance(a, b, DistanceKind::kCosine).item(), 1.0, 1e-15);
}

TEST(GradientDistanceTest, ZeroNormCosineNamesOperand) {
  const GradientVector a = MakeGrad({{1.0, 2.0}});
  const GradientVector z = MakeGrad({{0.0, 0.0}});
  try {
    GradientDistance(a, z, DistanceKind::kCosine);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("second"), std::string::npos);
  }
  try {
    GradientDistance(z, a, DistanceKind::kCosine);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("first"), std::string::npos);
  }
  EXPECT_THROW(GradientDistance(a, MakeGrad({{1.0}}), DistanceKind::kL2), Error);
}

TEST(TotalVariationTest, Examples) {
  EXPECT_EQ(TotalVariation(Tensor::Full(Shape{3, 4, 5}, 0.3)).item(), 0.0);
  EXPECT_DOUBLE_EQ(TotalVariation(Tensor(Shape{1, 1, 2}, {0.0, 1.0})).item(), 1.0);
  EXPECT_DOUBLE_EQ(
      TotalVariation(Tensor(Shape{1, 2, 2}, {0.0, 1.0, 1.0, 0.0})).item(), 4.0);
  EXPECT_DOUBLE_EQ(TotalVariation(Tensor(Shape{1, 1, 1}, {0.5})).item(), 0.0);
}

TEST(TotalVariationTest, MatchesDirectSum) {
  const Tensor x = RandomTensor(Shape{2, 3, 4}, 8, 0.0, 1.0);
  double expect = 0.0;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t z = 0; z < 4; ++z) {
        const double v = x.at((c * 3 + y) * 4 + z);
        if (z + 1 < 4) expect += std::fabs(x.at((c * 3 + y) * 4 + z + 1) - v);
        if (y + 1 < 3) expect += std::fabs(x.at((c * 3 + y + 1) * 4 + z) - v);
      }
  EXPECT_NEAR(TotalVariation(x).item(), expect, 1e-12);
}

TEST(OptimizerTest, AdamOnParabola) {
  std::vector<double> x = {1.0};
  Adam adam(1);
  for (int i = 0; i < 500; ++i) {
    const double g = 2.0 * x[0];
    adam.Step(x, std::vector<double>{g}, 0.1);
  }
  EXPECT_LT(std::fabs(x[0]), 1e-3);
}

TEST(OptimizerTest, SgdMomentumConverges) {
  std::vector<double> x = {1.0, -2.0};
  Sgd sgd(2, 0.9);
  for (int i = 0; i < 300; ++i) {
    sgd.Step(x, std::vector<double>{2.0 * x[0], 2.0 * x[1]}, 0.05);
  }
  EXPECT_LT(std::fabs(x[0]) + std::fabs(x[1]), 1e-6);
}

TEST(OptimizerTest, LbfgsQuadratic) {
  Objective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2.0 * (x[0] - 3.0);
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  std::vector<double> x = {0.0}, g(1);
  double value = f(x, g);
  Lbfgs lbfgs(1);
  int iters = 0;
  while (std::fabs(x[0] - 3.0) >= 1e-8 && iters < 20) {
    lbfgs.Step(x, value, g, f);
    ++iters;
  }
  EXPECT_LT(std::fabs(x[0] - 3.0), 1e-8);
  EXPECT_LE(iters, 20);
}

TEST(OptimizerTest, LbfgsRosenbrock) {
  Objective f = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  std::vector<double> x = {-1.2, 1.0}, g(2);
  double value = f(x, g);
  Lbfgs lbfgs(2);
  for (int i = 0; i < 200 && value > 1e-24; ++i) lbfgs.Step(x, value, g, f);
  EXPECT_LT(std::fabs(x[0] - 1.0), 1e-5);
  EXPECT_LT(std::fabs(x[1] - 1.0), 1e-5);
}

TEST(OptimizerTest, LbfgsFallsBackOnNonDescent) {
  // The objective disagrees with its reported gradient, so no Armijo step
  // exists and the fallback step is taken.
  Objective f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 1.0;
    return 1.0 + std::fabs(x[0]);
  };
  std::vector<double> x = {0.0}, g(1);
  double value = f(x, g);
  Lbfgs lbfgs(1);
  lbfgs.Step(x, value, g, f);
  EXPECT_TRUE(lbfgs.last_step_fell_back());
  EXPECT_NEAR(x[0], -std::ldexp(1.0, -20), 1e-18);
}

TEST(OptimizerTest, StepDecaySchedule) {
  EXPECT_EQ(StepDecay(0, 800), 1.0);
  EXPECT_EQ(StepDecay(299, 800), 1.0);
  EXPECT_NEAR(StepDecay(300, 800), 0.1, 1e-15);
  EXPECT_NEAR(StepDecay(500, 800), 0.01, 1e-15);
  EXPECT_NEAR(StepDecay(799, 800), 0.001, 1e-15);
}

class AttackTest : public ::testing::Test {
 protected:
  AttackTest()
      : model_(ModelConfig::Mlp({6}, ImageShape{1, 3, 3}, 3, 4)),
        params_(model_.Init()),
        image_(RandomTensor(Shape{1, 3, 3}, 21, 0.1, 0.9)) {
    target_.gradient = model_.LossGradients(params_, image_, Labels::Single(1));
    target_.label = 1;
    target_.reference = image_;
  }

  Model model_;
  ModelParams params_;
  Tensor image_;
  AttackTarget target_;
};

TEST_F(AttackTest, ObjectiveGradientMatchesFiniteDifferences) {
  for (auto kind : {DistanceKind::kL2, DistanceKind::kL1, DistanceKind::kCosine}) {
    AttackConfig cfg;
    cfg.distance = kind;
    const Tensor x = RandomTensor(Shape{1, 3, 3}, 5, 0.2, 0.8);
    const ObjectiveValue v =
        EvaluateAttackObjective(model_, params_, target_, cfg, x);
    const Tensor fd = FiniteDiffGradient(
        [&](const Tensor& p) {
          return EvaluateAttackObjective(model_, params_, target_, cfg, p).objective;
        },
        x, 1e-5);
    EXPECT_LT(RelativeError(v.grad_x, fd), 1e-3) << DistanceName(kind);
  }
}

TEST_F(AttackTest, SoftLabelObjectiveGradientMatchesFiniteDifferences) {
  AttackConfig cfg;
  cfg.label_mode = LabelMode::kOptimizeSoft;
  AttackTarget t = target_;
  t.label.reset();
  const Tensor x = RandomTensor(Shape{1, 3, 3}, 6, 0.2, 0.8);
  const Tensor z = RandomTensor(Shape{1, 3}, 7);
  const ObjectiveValue v = EvaluateAttackObjective(model_, params_, t, cfg, x, z);
  const Tensor fd = FiniteDiffGradient(
      [&](const Tensor& p) {
        return EvaluateAttackObjective(model_, params_, t, cfg, x, p).objective;
      },
      z, 1e-5);
  EXPECT_LT(RelativeError(*v.grad_logits, fd), 1e-3);
}

TEST_F(AttackTest, CosineObjectiveInvariantToTargetScale) {
  AttackConfig cfg;
  const Tensor x = RandomTensor(Shape{1, 3, 3}, 9, 0.0, 1.0);
  AttackTarget scaled = target_;
  for (auto& l : scaled.gradient.layers) l = Scale(l, 37.5);
  const double a = EvaluateAttackObjective(model_, params_, target_, cfg, x).objective;
  const double b = EvaluateAttackObjective(model_, params_, scaled, cfg, x).objective;
  EXPECT_LT(std::fabs(a - b), 1e-10);
}

TEST_F(AttackTest, FromTargetImageIsFixedPoint) {
  AttackConfig cfg;
  cfg.iterations = 20;
  cfg.tv_weight = 0.0;
  cfg.init = InitKind::kFromImage;
  cfg.init_image = image_;
  cfg.layer_trace_every = 5;
  const AttackResult r = Reconstruct(model_, params_, target_, cfg);
  EXPECT_LT(r.trace.at(0).objective, 1e-12);
  EXPECT_EQ(r.reconstruction.ToVector(), image_.ToVector());
  EXPECT_EQ(*r.psnr, kPsnrCap);
  ASSERT_EQ(r.layer_trace.iterations.size(), 4u);
  EXPECT_EQ(r.layer_trace.layers.size(), params_.size());
  for (const auto& s : r.layer_trace.similarity.at(0)) {
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(*s, 1.0, 1e-12);
  }
}

TEST_F(AttackTest, TraceAndRestartInvariants) {
  AttackConfig cfg;
  cfg.iterations = 60;
  cfg.restarts = 3;
  cfg.seed = 3;
  cfg.layer_trace_every = 7;
  const AttackResult r = Reconstruct(model_, params_, target_, cfg);
  EXPECT_LE(r.trace.size(), cfg.iterations);
  ASSERT_EQ(r.restarts.size(), 3u);
  for (const auto& s : r.restarts) EXPECT_LE(r.objective, s.objective);
  EXPECT_EQ(r.objective, r.restarts[r.best_restart].objective);
  double best = r.trace[0].objective;
  for (const auto& p : r.trace) best = std::min(best, p.objective);
  EXPECT_EQ(best, r.objective);
  // The PSNR column tracks the best iterate, so it only changes when the
  // objective reaches a new minimum.
  double running = r.trace[0].objective;
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].objective >= running) {
      EXPECT_EQ(r.trace[i].psnr, r.trace[i - 1].psnr);
    }
    running = std::min(running, r.trace[i].objective);
  }
  for (const auto& row : r.layer_trace.similarity)
    for (const auto& s : row)
      if (s) {
        EXPECT_GE(*s, -1.0);
        EXPECT_LE(*s, 1.0);
      }
  for (double v : r.reconstruction.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST_F(AttackTest, Deterministic) {
  AttackConfig cfg;
  cfg.iterations = 30;
  cfg.seed = 12;
  const AttackResult a = Reconstruct(model_, params_, target_, cfg);
  const AttackResult b = Reconstruct(model_, params_, target_, cfg);
  EXPECT_EQ(a.reconstruction.ToVector(), b.reconstruction.ToVector());
  EXPECT_EQ(a.objective, b.objective);
}

TEST_F(AttackTest, SoftLabelModeProducesDistribution) {
  AttackConfig cfg;
  cfg.iterations = 40;
  cfg.label_mode = LabelMode::kOptimizeSoft;
  AttackTarget t = target_;
  t.label.reset();
  const AttackResult r = Reconstruct(model_, params_, t, cfg);
  ASSERT_TRUE(r.soft_label.has_value());
  double total = 0.0;
  for (double p : r.soft_label->values()) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST_F(AttackTest, AllRestartsDivergedIsError) {
  // A zero target gradient makes every cosine evaluation degenerate.
  AttackConfig cfg;
  cfg.iterations = 5;
  cfg.restarts = 2;
  AttackTarget t = target_;
  for (auto& l : t.gradient.layers) l = Tensor::Zeros(l.shape());
  EXPECT_THROW(Reconstruct(model_, params_, t, cfg), NumericalError);
}

TEST_F(AttackTest, InvalidConfigurations) {
  AttackConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(Reconstruct(model_, params_, target_, cfg), Error);
  cfg = AttackConfig{};
  cfg.tv_weight = -1.0;
  EXPECT_THROW(Reconstruct(model_, params_, target_, cfg), Error);
  cfg = AttackConfig{};
  cfg.init = InitKind::kFromImage;
  EXPECT_THROW(Reconstruct(model_, params_, target_, cfg), Error);
  cfg = AttackConfig{};
  AttackTarget unlabeled = target_;
  unlabeled.label.reset();
  EXPECT_THROW(Reconstruct(model_, params_, unlabeled, cfg), Error);
}

TEST(AttackConfigTest, LbfgsDefaults) {
  const AttackConfig cfg = AttackConfig::For(OptimizerKind::kLbfgs, DistanceKind::kL2);
  EXPECT_EQ(cfg.iterations, 300u);
  EXPECT_EQ(cfg.restarts, 16u);
  const AttackConfig adam = AttackConfig::For(OptimizerKind::kAdam, DistanceKind::kCosine);
  EXPECT_EQ(adam.iterations, 4800u);
  EXPECT_EQ(adam.restarts, 1u);
  EXPECT_DOUBLE_EQ(adam.tv_weight, 1e-4);
}

TEST(AttackRecoveryTest, LinearModelAdamL2) {
  // One input pixel, two classes: dL/dW = (p - y) x and dL/db = p - y, so
  // the target pixel is the ratio of the two gradients.
  Model model(ModelConfig::Mlp({}, ImageShape{1, 1, 1}, 2, 3));
  const ModelParams params = model.Init();
  const Tensor x(Shape{1, 1, 1}, {0.63});
  AttackTarget target{model.LossGradients(params, x, Labels::Single(0)), 0, x};
  const double analytic =
      target.gradient.layers[0].at(0) / target.gradient.layers[1].at(0);
  ASSERT_NEAR(analytic, 0.63, 1e-12);
  AttackConfig cfg;
  cfg.distance = DistanceKind::kL2;
  cfg.iterations = 3000;
  cfg.tv_weight = 0.0;
  cfg.learning_rate = 0.05;
  cfg.seed = 1;
  const AttackResult r = Reconstruct(model, params, target, cfg);
  EXPECT_LT(std::fabs(r.reconstruction.at(0) - analytic), 1e-4);
}

TEST(AttackRecoveryTest, MlpAdamCosine) {
  Model model(ModelConfig::Mlp({32}, ImageShape{1, 8, 8}, 10, 2));
  const ModelParams params = model.Init();
  const Dataset data = SynthDataset(SynthSpec{});
  const Tensor& x = data.images[17];
  AttackTarget target{model.LossGradients(params, x, Labels::Single(data.labels[17])),
                      data.labels[17], x};
  AttackConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 5;
  const AttackResult r = Reconstruct(model, params, target, cfg);
  EXPECT_LT(MeanSquaredError(r.reconstruction, x), 1e-3);
}

}  // namespace
}  // namespace ats
