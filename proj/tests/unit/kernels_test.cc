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

#include "ats/kernels.h"

#include <cstddef>
#include <vector>

#include "ats/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace ats::kernels {
namespace {

std::vector<double> Random(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.Uniform(-1.0, 1.0);
  return v;
}

class KernelEquivalenceTest : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (Avx2Kernels() == nullptr || !HostSupportsAvx2()) {
      GTEST_SKIP() << "AVX2 variant unavailable on this host";
    }
  }
  const KernelTable& scalar_ = ScalarKernels();
  const KernelTable* simd_ = Avx2Kernels();
};

TEST_P(KernelEquivalenceTest, ReductionsAgree) {
  const std::size_t n = GetParam();
  auto a = Random(n, 1 + n), b = Random(n, 2 + n);
  const double ref = scalar_.dot(a, b);
  EXPECT_NEAR(simd_->dot(a, b), ref, 1e-12 * (1.0 + std::fabs(ref)) * n);
  const double sref = scalar_.sum(a);
  EXPECT_NEAR(simd_->sum(a), sref, 1e-12 * (1.0 + std::fabs(sref)) * n);
}

TEST_P(KernelEquivalenceTest, ElementwiseIsBitExact) {
  const std::size_t n = GetParam();
  auto a = Random(n, 3 + n), b = Random(n, 4 + n);
  std::vector<double> r1(n), r2(n);
  scalar_.add(a, b, r1);
  simd_->add(a, b, r2);
  EXPECT_EQ(r1, r2);
  scalar_.sub(a, b, r1);
  simd_->sub(a, b, r2);
  EXPECT_EQ(r1, r2);
  scalar_.mul(a, b, r1);
  simd_->mul(a, b, r2);
  EXPECT_EQ(r1, r2);
  scalar_.scale(-0.37, a, r1);
  simd_->scale(-0.37, a, r2);
  EXPECT_EQ(r1, r2);
}

TEST_P(KernelEquivalenceTest, AxpyAgrees) {
  const std::size_t n = GetParam();
  auto x = Random(n, 5 + n), y1 = Random(n, 6 + n);
  auto y2 = y1;
  scalar_.axpy(0.75, x, y1);
  simd_->axpy(0.75, x, y2);
  EXPECT_LT(testing::MaxAbsDiff(y1, y2), 1e-15);
}

TEST_P(KernelEquivalenceTest, GemmAgrees) {
  const std::size_t n = GetParam();
  const std::size_t m = n % 7 + 1, k = n % 5 + 2;
  auto a = Random(m * k, 7 + n), b = Random(k * n, 8 + n);
  std::vector<double> c1(m * n), c2(m * n);
  scalar_.gemm(m, n, k, a, b, c1);
  simd_->gemm(m, n, k, a, b, c2);
  EXPECT_LT(testing::MaxAbsDiff(c1, c2), 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Sizes, KernelEquivalenceTest,
                         ::testing::Values(1, 3, 4, 5, 8, 9, 16, 31, 64, 257));

TEST(KernelTest, ScalarGemmMatchesHandProduct) {
  // [[1, 2], [3, 4]] * [[5, 6], [7, 8]]
  std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8}, c(4);
  ScalarKernels().gemm(2, 2, 2, a, b, c);
  EXPECT_EQ(c, (std::vector<double>{19, 22, 43, 50}));
}

TEST(KernelTest, ActiveTableIsOneOfTheVariants) {
  const auto name = Active().name;
  EXPECT_TRUE(name == "scalar" || name == "avx2");
}

}  // namespace
}  // namespace ats::kernels
