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

#include "ats/defense.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace ats {
namespace {

using ::ats::testing::RandomTensor;

GradientVector Layers(std::vector<Tensor> layers) { return {std::move(layers)}; }

GradientVector RandomGrad(std::uint64_t seed) {
  return Layers({RandomTensor(Shape{7, 5}, seed), RandomTensor(Shape{5}, seed + 1),
                 RandomTensor(Shape{3, 2, 3, 3}, seed + 2)});
}

std::size_t NonZeros(const Tensor& t) {
  std::size_t n = 0;
  for (double v : t.values()) n += v != 0.0;
  return n;
}

TEST(PruneTest, Examples) {
  const GradientVector g = Layers({Tensor(Shape{4}, {0.5, -0.2, 0.1, -0.8})});
  EXPECT_EQ(PruneGradients(g, 0.5).layers[0].ToVector(),
            (std::vector<double>{0.5, 0.0, 0.0, -0.8}));
  EXPECT_EQ(PruneGradients(g, 0.0).layers[0].ToVector(), g.layers[0].ToVector());
  EXPECT_EQ(PruneGradients(g, 1.0).layers[0].ToVector(),
            (std::vector<double>(4, 0.0)));
}

TEST(PruneTest, TiesKeepLowerIndex) {
  const GradientVector g = Layers({Tensor(Shape{4}, {0.3, -0.3, 0.3, 0.1})});
  EXPECT_EQ(PruneGradients(g, 0.5).layers[0].ToVector(),
            (std::vector<double>{0.3, -0.3, 0.0, 0.0}));
}

TEST(PruneTest, KeepCount) {
  EXPECT_EQ(PruneKeepCount(10, 0.7), 3u);
  EXPECT_EQ(PruneKeepCount(100, 0.95), 5u);
  EXPECT_EQ(PruneKeepCount(100, 0.99), 1u);
  EXPECT_EQ(PruneKeepCount(7, 0.5), 4u);
  EXPECT_EQ(PruneKeepCount(3, 0.99), 1u);
  EXPECT_EQ(PruneKeepCount(3, 1.0), 0u);
}

TEST(PruneTest, NonzeroBoundAndKeptValuesExact) {
  for (double ratio : {0.3, 0.7, 0.95, 0.99}) {
    const GradientVector g = RandomGrad(3);
    const GradientVector p = PruneGradients(g, ratio);
    for (std::size_t l = 0; l < g.size(); ++l) {
      EXPECT_EQ(p.layers[l].shape(), g.layers[l].shape());
      EXPECT_LE(NonZeros(p.layers[l]),
                static_cast<std::size_t>(std::ceil((1 - ratio) * g.layers[l].numel())));
      double min_kept = INFINITY, max_dropped = 0.0;
      for (std::size_t i = 0; i < g.layers[l].numel(); ++i) {
        const double v = p.layers[l].at(i);
        if (v != 0.0) {
          EXPECT_EQ(v, g.layers[l].at(i));
          min_kept = std::min(min_kept, std::fabs(v));
        } else {
          max_dropped = std::max(max_dropped, std::fabs(g.layers[l].at(i)));
        }
      }
      EXPECT_GE(min_kept, max_dropped);
    }
  }
}

TEST(NoiseTest, VanishingScaleIsIdentity) {
  const GradientVector g = RandomGrad(5);
  for (auto spec : {DefenseSpec::Gaussian(1e-12, 1), DefenseSpec::Laplacian(1e-12, 1)}) {
    const GradientVector n = NoiseGradients(g, spec);
    for (std::size_t l = 0; l < g.size(); ++l)
      for (std::size_t i = 0; i < g.layers[l].numel(); ++i)
        EXPECT_LT(std::fabs(n.layers[l].at(i) - g.layers[l].at(i)), 1e-5);
  }
}

GradientVector ZeroGrad(std::size_t n) { return Layers({Tensor::Zeros(Shape{n})}); }

TEST(NoiseTest, GaussianVarianceReading) {
  const GradientVector n = NoiseGradients(ZeroGrad(1000000), DefenseSpec::Gaussian(1e-2, 7));
  double sum = 0.0, sq = 0.0;
  for (double v : n.layers[0].values()) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / 1e6;
  const double var = sq / 1e6 - mean * mean;
  EXPECT_NEAR(var, 1e-2, 1e-3);
}

TEST(NoiseTest, GaussianStdReading) {
  DefenseSpec spec = DefenseSpec::Gaussian(1e-1, 8);
  spec.gaussian_scale_is_std = true;
  const GradientVector n = NoiseGradients(ZeroGrad(200000), spec);
  double sq = 0.0;
  for (double v : n.layers[0].values()) sq += v * v;
  EXPECT_NEAR(sq / 2e5, 1e-2, 1e-3);
}

TEST(NoiseTest, LaplacianMeanAbsolute) {
  const GradientVector n = NoiseGradients(ZeroGrad(1000000), DefenseSpec::Laplacian(0.03, 9));
  double abs = 0.0;
  for (double v : n.layers[0].values()) abs += std::fabs(v);
  EXPECT_NEAR(abs / 1e6, 0.03, 0.05 * 0.03);
}

TEST(NoiseTest, SameSeedSameNoise) {
  const GradientVector g = RandomGrad(2);
  const auto a = NoiseGradients(g, DefenseSpec::Gaussian(1e-3, 4));
  const auto b = NoiseGradients(g, DefenseSpec::Gaussian(1e-3, 4));
  const auto c = NoiseGradients(g, DefenseSpec::Gaussian(1e-3, 5));
  for (std::size_t l = 0; l < g.size(); ++l) {
    EXPECT_EQ(a.layers[l].ToVector(), b.layers[l].ToVector());
    EXPECT_NE(a.layers[l].ToVector(), c.layers[l].ToVector());
  }
}

TEST(DefenseSpecTest, ParseAndValidate) {
  EXPECT_EQ(ParseDefense("prune:0.95").kind, DefenseKind::kPrune);
  EXPECT_DOUBLE_EQ(ParseDefense("gaussian:1e-3").parameter, 1e-3);
  EXPECT_EQ(ParseDefense("laplacian:0.01").ToString(), "laplacian:0.01");
  EXPECT_THROW(ParseDefense("prune:1.5"), Error);
  EXPECT_THROW(ParseDefense("gaussian:0"), Error);
  EXPECT_THROW(ParseDefense("gaussian"), Error);
  EXPECT_THROW(ParseDefense("blur:1"), Error);
  EXPECT_THROW(ParseDefense("prune:x"), Error);
}

}  // namespace
}  // namespace ats
