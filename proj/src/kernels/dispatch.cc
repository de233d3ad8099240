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

#include <cstdlib>
#include <string_view>

#include "ats/kernels.h"

namespace ats::kernels {

#if !defined(ATS_HAVE_AVX2)
const KernelTable* Avx2Kernels() { return nullptr; }
#endif

bool HostSupportsAvx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& Select() {
  const char* forced = std::getenv("ATS_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return ScalarKernels();
  }
  const KernelTable* avx2 = Avx2Kernels();
  if (avx2 != nullptr && HostSupportsAvx2()) return *avx2;
  return ScalarKernels();
}

}  // namespace

const KernelTable& Active() {
  static const KernelTable& table = Select();
  return table;
}

}  // namespace ats::kernels
