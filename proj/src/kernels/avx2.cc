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

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <span>

#include "ats/kernels.h"

namespace ats::kernels {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double Dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i),
                           _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4),
                           _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i),
                           _mm256_loadu_pd(b.data() + i), acc0);
  }
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

double Sum(std::span<const double> a) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a.data() + i));
  double total = HorizontalSum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy);
    _mm256_storeu_pd(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

template <typename VecOp, typename ScalarOp>
inline void Binary(std::span<const double> a, std::span<const double> b,
                   std::span<double> out, VecOp vop, ScalarOp sop) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, vop(_mm256_loadu_pd(a.data() + i),
                                         _mm256_loadu_pd(b.data() + i)));
  }
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void Add(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  Binary(a, b, out, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
         [](double x, double y) { return x + y; });
}

void Sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  Binary(a, b, out, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
         [](double x, double y) { return x - y; });
}

void Mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  Binary(a, b, out, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
         [](double x, double y) { return x * y; });
}

void Scale(double alpha, std::span<const double> a, std::span<double> out) {
  const std::size_t n = a.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i,
                     _mm256_mul_pd(va, _mm256_loadu_pd(a.data() + i)));
  }
  for (; i < n; ++i) out[i] = alpha * a[i];
}

void Gemm(std::size_t m, std::size_t n, std::size_t k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const __m256d va = _mm256_set1_pd(aip);
      const double* brow = b.data() + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d vc = _mm256_loadu_pd(crow + j);
        vc = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + j), vc);
        _mm256_storeu_pd(crow + j, vc);
      }
      for (; j < n; ++j) crow[j] = std::fma(aip, brow[j], crow[j]);
    }
  }
}

constexpr KernelTable kAvx2{
    .name = "avx2",
    .dot = Dot,
    .sum = Sum,
    .axpy = Axpy,
    .add = Add,
    .sub = Sub,
    .mul = Mul,
    .scale = Scale,
    .gemm = Gemm,
};

}  // namespace

const KernelTable* Avx2Kernels() { return &kAvx2; }

}  // namespace ats::kernels
