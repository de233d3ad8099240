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

#include "ats/fedsim.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "test_util.h"

namespace ats {
namespace {

using testing::MaxAbsDiff;

Dataset Numbered(std::size_t n) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.images.push_back(Tensor({1, 2, 2}, std::vector<double>(4, static_cast<double>(i) / n)));
    d.labels.push_back(static_cast<int>(i % 2));
  }
  return d;
}

std::vector<double> FirstPixels(const Dataset& d) {
  std::vector<double> v;
  for (const Tensor& t : d.images) v.push_back(t.values()[0]);
  return v;
}

TEST(ShardTest, TenSamplesTenParticipantsOneEach) {
  const auto shards = ShardDataset(Numbered(10), 10, 1);
  ASSERT_EQ(shards.size(), 10u);
  std::set<double> seen;
  for (const Dataset& s : shards) {
    ASSERT_EQ(s.size(), 1u);
    seen.insert(s.images[0].values()[0]);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(ShardTest, RemainderIsDroppedAndShardsAreDisjoint) {
  const auto shards = ShardDataset(Numbered(11), 10, 4);
  std::set<double> seen;
  std::size_t total = 0;
  for (const Dataset& s : shards) {
    total += s.size();
    for (double v : FirstPixels(s)) seen.insert(v);
  }
  EXPECT_EQ(total, 10u);
  EXPECT_EQ(seen.size(), 10u);

  const auto big = ShardDataset(Numbered(103), 4, 9);
  seen.clear();
  for (const Dataset& s : big) {
    EXPECT_EQ(s.size(), 25u);
    for (double v : FirstPixels(s)) EXPECT_TRUE(seen.insert(v).second);
  }
}

TEST(ShardTest, TooFewSamplesIsAnError) {
  EXPECT_THROW(ShardDataset(Numbered(3), 4, 0), Error);
  EXPECT_THROW(ShardDataset(Numbered(3), 0, 0), Error);
}

TEST(ScheduleTest, StepsDownAtThreeEighthsFiveEighthsSevenEighths) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  const std::size_t total = 80;
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(cfg, 0, total), 0.1);
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(cfg, 29, total), 0.1);
  EXPECT_NEAR(ScheduledLearningRate(cfg, 30, total), 0.01, 1e-15);
  EXPECT_NEAR(ScheduledLearningRate(cfg, 49, total), 0.01, 1e-15);
  EXPECT_NEAR(ScheduledLearningRate(cfg, 50, total), 0.001, 1e-16);
  EXPECT_NEAR(ScheduledLearningRate(cfg, 70, total), 0.0001, 1e-17);
  EXPECT_NEAR(ScheduledLearningRate(cfg, 79, total), 0.0001, 1e-17);
  cfg.lr_decay = false;
  EXPECT_DOUBLE_EQ(ScheduledLearningRate(cfg, 79, total), 0.1);
}

class RoundTest : public ::testing::Test {
 protected:
  RoundTest()
      : model_(ModelConfig::Mlp({6}, ImageShape{1, 4, 4}, 3, 2)),
        data_(SynthDataset({.classes = 3, .samples_per_class = 4,
                            .shape = {1, 6, 6}, .noise = 0.03, .seed = 5})) {
    // Shrink to 4x4 by cropping so the MLP stays tiny.
    for (Tensor& img : data_.images) {
      std::vector<double> v;
      for (std::size_t y = 1; y < 5; ++y)
        for (std::size_t x = 1; x < 5; ++x) v.push_back(img.values()[y * 6 + x]);
      img = Tensor({1, 4, 4}, std::move(v));
    }
  }
  Model model_;
  Dataset data_;
};

TEST_F(RoundTest, SingleParticipantMatchesManualUpdate) {
  TrainConfig cfg;
  cfg.participants = 1;
  cfg.batch_size = 5;
  cfg.seed = 11;
  const auto shards = ShardDataset(data_, 1, cfg.seed);
  ModelParams params = model_.Init();
  const ModelParams before = params;
  SgdState state;
  RunRound(model_, params, state, shards, cfg, 0, 0.05);

  const auto idx = RoundBatch(shards[0], cfg, 0, 0);
  const Dataset batch = shards[0].Subset(idx);
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), 0);
  const GradientVector g =
      model_.LossGradients(before, batch.Batch(all), Labels::Hard(batch.labels));
  SgdState manual_state;
  const ModelParams expected = SgdUpdate(before, g, manual_state, 0.05, cfg.sgd);
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto a = params.layers[l].value.values();
    const auto b = expected.layers[l].value.values();
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << "layer " << l;
  }
}

TEST_F(RoundTest, HandUpdateWithoutMomentumOrDecay) {
  TrainConfig cfg;
  cfg.participants = 1;
  cfg.batch_size = 12;
  cfg.sgd = {.momentum = 0.0, .weight_decay = 0.0};
  const auto shards = ShardDataset(data_, 1, 0);
  ModelParams params = model_.Init();
  const ModelParams before = params;
  SgdState state;
  RunRound(model_, params, state, shards, cfg, 0, 0.3);
  const GradientVector g = model_.LossGradients(
      before, shards[0].Batch(RoundBatch(shards[0], cfg, 0, 0)),
      Labels::Hard(shards[0].BatchLabels(RoundBatch(shards[0], cfg, 0, 0))));
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto w0 = before.layers[l].value.values();
    const auto gl = g.layers[l].values();
    std::vector<double> expected(w0.size());
    for (std::size_t i = 0; i < w0.size(); ++i) expected[i] = w0[i] - 0.3 * gl[i];
    EXPECT_LT(MaxAbsDiff(params.layers[l].value.values(), expected), 1e-15);
  }
}

TEST_F(RoundTest, IdenticalParticipantsAggregateToOneGradient) {
  // Every participant holds the same single sample.
  Dataset one = data_.Subset(std::vector<std::size_t>{3});
  std::vector<Dataset> shards(3, one);
  TrainConfig cfg;
  cfg.participants = 3;
  cfg.sgd = {.momentum = 0.0, .weight_decay = 0.0};
  ModelParams params = model_.Init();
  const ModelParams before = params;
  SgdState state;
  Adversary adv;
  adv.Arm(0, 2);
  const RoundLog log = RunRound(model_, params, state, shards, cfg, 0, 1.0, &adv);
  const GradientVector g = model_.LossGradients(before, one.Batch(std::vector<std::size_t>{0}),
                                                Labels::Hard(one.labels));
  ASSERT_EQ(log.participant_grad_norms.size(), 3u);
  EXPECT_DOUBLE_EQ(log.participant_grad_norms[0], log.participant_grad_norms[2]);
  EXPECT_DOUBLE_EQ(log.update_norm, log.participant_grad_norms[0]);
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto w0 = before.layers[l].value.values();
    const auto gl = g.layers[l].values();
    const auto w1 = params.layers[l].value.values();
    for (std::size_t i = 0; i < w0.size(); ++i) EXPECT_EQ(w1[i], w0[i] - gl[i]);
  }
}

TEST_F(RoundTest, AdversaryCaptureIsTheSharedGradient) {
  TrainConfig cfg;
  cfg.participants = 2;
  cfg.batch_size = 3;
  cfg.seed = 8;
  const auto shards = ShardDataset(data_, 2, cfg.seed);
  ModelParams params = model_.Init();
  const ModelParams before = params;
  SgdState state;
  Adversary adv;
  adv.Arm(0, 1);
  EXPECT_THROW(adv.Capture(0, 1), Error);
  EXPECT_THROW(adv.Capture(0, 0), Error);
  RunRound(model_, params, state, shards, cfg, 0, 0.1, &adv);
  const CapturedUpdate& cap = adv.Capture(0, 1);
  const GradientVector g =
      model_.LossGradients(before, cap.inputs, Labels::Hard(cap.labels));
  for (std::size_t l = 0; l < g.size(); ++l) {
    const auto a = cap.gradient.layers[l].values();
    const auto b = g.layers[l].values();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  EXPECT_EQ(MaxAbsDiff(cap.inputs.values(), cap.originals.values()), 0.0);
  EXPECT_THROW(adv.Capture(1, 1), Error);
}

TEST_F(RoundTest, PrunedCaptureRespectsKeepCount) {
  TrainConfig cfg;
  cfg.participants = 1;
  cfg.defense = DefenseSpec::Prune(0.7);
  const auto shards = ShardDataset(data_, 1, 0);
  ModelParams params = model_.Init();
  SgdState state;
  Adversary adv;
  adv.Arm(0, 0);
  RunRound(model_, params, state, shards, cfg, 0, 0.1, &adv);
  for (const Tensor& layer : adv.Capture(0, 0).gradient.layers) {
    const auto v = layer.values();
    const auto nonzero = std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
    EXPECT_LE(static_cast<std::size_t>(nonzero), PruneKeepCount(v.size(), 0.7));
  }
}

TEST_F(RoundTest, PolicyTransformsInputsButNotOriginals) {
  TrainConfig cfg;
  cfg.participants = 1;
  cfg.batch_size = 4;
  cfg.policies = PolicySet::Of({ParsePolicy("29", PolicyTable::Default())});  // invert
  const auto shards = ShardDataset(data_, 1, 0);
  ModelParams params = model_.Init();
  SgdState state;
  Adversary adv;
  adv.Arm(0, 0);
  RunRound(model_, params, state, shards, cfg, 0, 0.1, &adv);
  const CapturedUpdate& cap = adv.Capture(0, 0);
  const auto in = cap.inputs.values();
  const auto orig = cap.originals.values();
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_NEAR(in[i], 1.0 - orig[i], 1e-12);
}

TEST(TrainingTest, SeparableTwoClassSetIsLearned) {
  const SynthSpec spec{.classes = 2, .samples_per_class = 40, .shape = {1, 8, 8}, .seed = 1};
  SynthSpec eval_spec = spec;
  eval_spec.seed = 2;
  eval_spec.samples_per_class = 20;
  const Model model(ModelConfig::Mlp({8}, ImageShape{1, 8, 8}, 2, 3));
  TrainConfig cfg;
  cfg.participants = 2;
  cfg.epochs = 15;
  cfg.seed = 4;
  const TrainingResult r =
      RunTraining(model, model.Init(), cfg, SynthDataset(spec), SynthDataset(eval_spec));
  ASSERT_EQ(r.accuracy.size(), 16u);
  EXPECT_GE(r.accuracy.back(), 0.95);
  EXPECT_EQ(r.rounds.size(), 15 * r.rounds_per_epoch);
}

TEST(TrainingTest, ZeroEpochsReportsInitialAccuracy) {
  const Dataset train = SynthDataset({.classes = 3, .samples_per_class = 5, .seed = 1});
  const Dataset eval = SynthDataset({.classes = 3, .samples_per_class = 5, .seed = 2});
  const Model model(ModelConfig::Mlp({4}, ImageShape{1, 8, 8}, 3, 3));
  TrainConfig cfg;
  cfg.participants = 3;
  cfg.epochs = 0;
  const ModelParams init = model.Init();
  const TrainingResult r = RunTraining(model, init, cfg, train, eval);
  ASSERT_EQ(r.accuracy.size(), 1u);
  EXPECT_DOUBLE_EQ(r.accuracy[0], EvalAccuracy(model, init, eval));
  EXPECT_TRUE(r.rounds.empty());
}

TEST(TrainingTest, SameSeedSameHistory) {
  const Dataset train = SynthDataset({.classes = 3, .samples_per_class = 8, .seed = 1});
  const Dataset eval = SynthDataset({.classes = 3, .samples_per_class = 5, .seed = 2});
  const Model model(ModelConfig::ConvNet(ImageShape{1, 8, 8}, 3, 3));
  TrainConfig cfg;
  cfg.participants = 2;
  cfg.epochs = 2;
  cfg.seed = 6;
  cfg.policies = PolicySet::Of({ParsePolicy("3-1-7", PolicyTable::Default()),
                                ParsePolicy("43-18", PolicyTable::Default())});
  cfg.defense = DefenseSpec::Gaussian(1e-3);
  const TrainingResult a = RunTraining(model, model.Init(), cfg, train, eval);
  const TrainingResult b = RunTraining(model, model.Init(), cfg, train, eval);
  EXPECT_EQ(a.accuracy, b.accuracy);
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    EXPECT_EQ(a.rounds[i].update_norm, b.rounds[i].update_norm);
    EXPECT_EQ(a.rounds[i].train_loss, b.rounds[i].train_loss);
  }
}

TEST(TrainingTest, InvalidConfigsAreRejected) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = TrainConfig{};
  cfg.policies = PolicySet{};
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(SynthTest, DeterministicWithExactClassCounts) {
  const SynthSpec spec{.classes = 4, .samples_per_class = 7, .shape = {3, 8, 8}, .seed = 9};
  const Dataset a = SynthDataset(spec);
  const Dataset b = SynthDataset(spec);
  ASSERT_EQ(a.size(), 28u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(MaxAbsDiff(a.images[i].values(), b.images[i].values()), 0.0);
    EXPECT_EQ(a.images[i].shape(), (Shape{3, 8, 8}));
  }
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(std::count(a.labels.begin(), a.labels.end(), c), 7);
  }
  for (const Tensor& img : a.images)
    for (double v : img.values()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  EXPECT_THROW(SynthDataset({.classes = 11}), Error);
  EXPECT_THROW(SynthDataset({.classes = 1}), Error);
}

TEST(SynthTest, SmallMlpExceedsNinetyPercentOnDefaultSpec) {
  const SynthSpec train_spec{.seed = 1};
  const SynthSpec eval_spec{.samples_per_class = 20, .seed = 2};
  const Model model(ModelConfig::Mlp({32}, ImageShape{1, 8, 8}, 10, 1));
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.seed = 3;
  const TrainingResult r = RunTraining(model, model.Init(), cfg, SynthDataset(train_spec),
                                       SynthDataset(eval_spec));
  EXPECT_GE(r.accuracy.back(), 0.9);
}

}  // namespace
}  // namespace ats
