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


#include "ats/config.h"

#include <cmath>
#include <cstdlib>
#include <string>

#include "gtest/gtest.h"

namespace ats {
namespace {

std::string Message(const std::string& json) {
  try {
    ParseConfig(json);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, MinimalConfigUsesDefaults) {
  const ExperimentConfig cfg = ParseConfig(R"({"seed": 3})");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.model.architecture, Architecture::kConvNet);
  EXPECT_EQ(cfg.model.channels, (std::vector<std::size_t>{8, 16}));
  EXPECT_EQ(cfg.attack.iterations, 4800u);
  EXPECT_EQ(cfg.search.c_max, 1500u);
  EXPECT_EQ(cfg.train.participants, 10u);
  EXPECT_FALSE(cfg.defense.has_value());
}

TEST(ConfigTest, SeedIsMandatory) {
  EXPECT_NE(Message(R"({"model": {}})").find("seed"), std::string::npos);
}

TEST(ConfigTest, UnknownKeysAreRejectedWithTheirPath) {
  EXPECT_NE(Message(R"({"seed": 1, "colour": 2})").find("colour"), std::string::npos);
  const std::string nested = Message(R"({"seed": 1, "attack": {"iters": 5}})");
  EXPECT_NE(nested.find("attack"), std::string::npos) << nested;
  EXPECT_NE(nested.find("iters"), std::string::npos) << nested;
  EXPECT_NE(Message(R"({"seed": 1, "data": {"synthetic": {"size": 2}}})").find("size"),
            std::string::npos);
}

TEST(ConfigTest, RejectsBadValues) {
  EXPECT_FALSE(Message(R"({"seed": 1, "attack": {"optimizer": "rmsprop"}})").empty());
  EXPECT_FALSE(Message(R"({"seed": 1, "attack": {"iterations": "many"}})").empty());
  EXPECT_FALSE(Message(R"({"seed": 1, "model": {"input": [8, 8]}})").empty());
  EXPECT_FALSE(Message(R"({"seed": 1, "defense": "blur:3"})").empty());
  EXPECT_FALSE(Message(R"({"seed": 1, "search": {"n": 0}})").empty());
  EXPECT_FALSE(Message("{not json").empty());
}

TEST(ConfigTest, NullThresholdMeansNoThreshold) {
  const ExperimentConfig cfg = ParseConfig(R"({"seed": 1, "search": {"t_acc": null}})");
  EXPECT_TRUE(std::isinf(cfg.search.t_acc));
  EXPECT_LT(cfg.search.t_acc, 0.0);
  EXPECT_EQ(ParseConfig(R"({"seed": 1, "search": {"t_acc": -7.5}})").search.t_acc, -7.5);
}

TEST(ConfigTest, SectionsAreParsed) {
  const ExperimentConfig cfg = ParseConfig(R"({
    "seed": 4,
    "model": {"architecture": "mlp", "widths": [16, 8], "input": [3, 6, 6], "classes": 4},
    "data": {"synthetic": {"classes": 4, "samples_per_class": 7, "shape": [3, 6, 6]}},
    "attack": {"optimizer": "lbfgs", "distance": "l2", "label": "optimize"},
    "search": {"hybrid_strictness": "op-name", "semi_train_epochs": 3},
    "train": {"participants": 2, "momentum": 0.5},
    "defense": "prune:0.9"
  })");
  EXPECT_EQ(cfg.model.architecture, Architecture::kMlp);
  EXPECT_EQ(cfg.model.widths, (std::vector<std::size_t>{16, 8}));
  EXPECT_EQ(cfg.model.input, (ImageShape{3, 6, 6}));
  ASSERT_TRUE(cfg.data.synthetic.has_value());
  EXPECT_EQ(cfg.data.synthetic->samples_per_class, 7u);
  EXPECT_EQ(cfg.attack.optimizer, OptimizerKind::kLbfgs);
  // lbfgs brings its own iteration and restart defaults.
  EXPECT_EQ(cfg.attack.iterations, 300u);
  EXPECT_EQ(cfg.attack.restarts, 16u);
  EXPECT_EQ(cfg.attack.label_mode, LabelMode::kOptimizeSoft);
  EXPECT_EQ(cfg.search.strictness, HybridStrictness::kOpName);
  EXPECT_EQ(cfg.semi_train.epochs, 3u);
  EXPECT_EQ(cfg.train.participants, 2u);
  EXPECT_EQ(cfg.train.sgd.momentum, 0.5);
  ASSERT_TRUE(cfg.defense.has_value());
  EXPECT_EQ(cfg.defense->ToString(), "prune:0.9");
}

TEST(ConfigTest, SnapshotRoundTrips) {
  const ExperimentConfig cfg = ParseConfig(R"({
    "seed": 11,
    "model": {"architecture": "smallresnet", "blocks": 2, "classes": 3},
    "data": {"synthetic": {"classes": 3, "seed": 99}},
    "search": {"t_acc": null},
    "defense": "laplacian:0.01"
  })");
  const std::string snapshot = ConfigToJson(cfg);
  EXPECT_EQ(ConfigToJson(ParseConfig(snapshot)), snapshot);
}

TEST(ConfigTest, SeedOverrideRederivesSectionSeeds) {
  ExperimentConfig a = ParseConfig(R"({"seed": 1, "data": {"synthetic": {}}})");
  const ExperimentConfig b = ParseConfig(R"({"seed": 2, "data": {"synthetic": {}}})");
  EXPECT_NE(a.model.seed, b.model.seed);
  EXPECT_NE(a.attack.seed, b.attack.seed);
  ApplySeed(a, 2);
  EXPECT_EQ(ConfigToJson(a), ConfigToJson(b));
}

TEST(ConfigTest, PinnedDataSeedSurvivesRootSeedChanges) {
  const auto a = ParseConfig(R"({"seed": 1, "data": {"synthetic": {"seed": 5}}})");
  const auto b = ParseConfig(R"({"seed": 2, "data": {"synthetic": {"seed": 5}}})");
  EXPECT_EQ(a.data.synthetic->seed, b.data.synthetic->seed);
}

TEST(ConfigTest, ReportRootHonoursEnvironment) {
  ExperimentConfig cfg = ParseConfig(R"({"seed": 1, "output_dir": "out"})");
  unsetenv("ATS_REPORT_ROOT");
  EXPECT_EQ(ReportRoot(cfg), std::filesystem::path("out"));
  setenv("ATS_REPORT_ROOT", "/tmp/elsewhere", 1);
  EXPECT_EQ(ReportRoot(cfg), std::filesystem::path("/tmp/elsewhere"));
  unsetenv("ATS_REPORT_ROOT");
}

}  // namespace
}  // namespace ats
