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

#include <cstddef>
#include <span>

#include "ats/kernels.h"

namespace ats::kernels {
namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double Sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void Add(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
}

void Sub(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
}

void Mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void Scale(double alpha, std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i];
}

// i-k-j order so the innermost loop streams rows of B and C.
void Gemm(std::size_t m, std::size_t n, std::size_t k,
          std::span<const double> a, std::span<const double> b,
          std::span<double> c) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

constexpr KernelTable kScalar{
    .name = "scalar",
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

const KernelTable& ScalarKernels() { return kScalar; }

}  // namespace ats::kernels
