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

#include "ats/hybrid.h"

#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace ats {
namespace {

ScoredPolicy Scored(std::string_view notation, double s_pri) {
  return {ParsePolicy(notation, PolicyTable::Default()), -1.0, s_pri, 0};
}

TEST(HybridTest, OpNameModeRejectsSharedOperations) {
  const PolicySet set = AssembleHybrid({Scored("3-1-7", 0.1), Scored("43-18-18", 0.2)},
                                       2, HybridStrictness::kOpName);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.policies[0].policy.Notation(), "3-1-7");
}

TEST(HybridTest, OpMagnitudeModeKeepsPaperPair) {
  const PolicySet set = AssembleHybrid({Scored("3-1-7", 0.1), Scored("43-18-18", 0.2)}, 2);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.policies[1].policy.Notation(), "43-18-18");
}

TEST(HybridTest, SingleAndDisjoint) {
  EXPECT_EQ(AssembleHybrid({Scored("0", 0.1)}, 2).size(), 1u);
  // invert/7 and solarize/0
  const PolicySet set = AssembleHybrid({Scored("0", 0.1), Scored("28", 0.2)}, 2,
                                       HybridStrictness::kOpName);
  EXPECT_EQ(set.size(), 2u);
  // Stops at m.
  EXPECT_EQ(AssembleHybrid({Scored("0", 0.1), Scored("28", 0.2), Scored("1", 0.3)}, 2)
                .size(),
            2u);
}

TEST(HybridTest, GreedyScanSkipsClashes) {
  // 16 and 35 are both equalize/5.
  const PolicySet set = AssembleHybrid(
      {Scored("16", 0.1), Scored("35", 0.2), Scored("3", 0.3)}, 2);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.policies[1].policy.Notation(), "3");
}

TEST(HybridTest, SingletonEqualsApplyPolicy) {
  const Policy p = ParsePolicy("3-1-7", PolicyTable::Default());
  const PolicySet set = PolicySet::Of({p});
  const Tensor img = ::ats::testing::RandomTensor(Shape{1, 6, 6}, 3, 0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(HybridApply(set, img, seed).ToVector(),
              ApplyPolicy(img, p, HybridPolicySeed(seed)).ToVector());
    EXPECT_EQ(HybridApply(set, img, seed).ToVector(),
              HybridApply(set, img, seed).ToVector());
  }
}

TEST(HybridTest, UniformSelection) {
  const PolicySet set = PolicySet::Of({ParsePolicy("0", PolicyTable::Default()),
                                       ParsePolicy("28", PolicyTable::Default()),
                                       ParsePolicy("3", PolicyTable::Default())});
  std::vector<int> counts(3, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) ++counts[HybridChoice(set, s)];
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 1.0 / 3.0, 0.05 / 3.0);
}

TEST(HybridTest, OnlyEligibleMembersAreDrawn) {
  PolicySet set = PolicySet::Of({ParsePolicy("0", PolicyTable::Default()),
                                 ParsePolicy("28", PolicyTable::Default())});
  set.hybrid_eligible = {false, true};
  for (std::uint64_t s = 0; s < 100; ++s) EXPECT_EQ(HybridChoice(set, s), 1u);
  EXPECT_THROW(HybridChoice(PolicySet{}, 0), Error);
}

TEST(HybridTest, StrictnessNames) {
  EXPECT_EQ(ParseHybridStrictness("op-name"), HybridStrictness::kOpName);
  EXPECT_EQ(ParseHybridStrictness("op+magnitude"), HybridStrictness::kOpMagnitude);
  EXPECT_FALSE(ParseHybridStrictness("strict").has_value());
}

}  // namespace
}  // namespace ats
