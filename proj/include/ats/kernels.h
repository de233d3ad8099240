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

#ifndef ATS_KERNELS_H_
#define ATS_KERNELS_H_

// Dense double-precision inner loops used by the tensor engine and the
// optimizers. Every routine has a portable scalar reference and, where the
// host supports it, an AVX2/FMA variant. The active table is chosen once at
// first use from CPUID; setting ATS_KERNELS=scalar forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace ats::kernels {

struct KernelTable {
  std::string_view name;

  double (*dot)(std::span<const double> a, std::span<const double> b);
  double (*sum)(std::span<const double> a);
  // y += alpha * x
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
  void (*add)(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
  void (*sub)(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
  void (*mul)(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
  void (*scale)(double alpha, std::span<const double> a,
                std::span<double> out);
  // C[m x n] = A[m x k] * B[k x n], all row-major; C is overwritten.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k,
               std::span<const double> a, std::span<const double> b,
               std::span<double> c);
};

const KernelTable& ScalarKernels();

// Returns nullptr when the binary was built without AVX2 support.
const KernelTable* Avx2Kernels();

bool HostSupportsAvx2();

// Table selected for this process.
const KernelTable& Active();

}  // namespace ats::kernels

#endif  // ATS_KERNELS_H_
