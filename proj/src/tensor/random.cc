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

#include "ats/random.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace ats {
namespace {

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t root,
                         std::initializer_list<std::uint64_t> streams) {
  std::uint64_t h = SplitMix(root);
  for (std::uint64_t s : streams) h = SplitMix(h ^ SplitMix(s + 0x632be59bd9b4e019ULL));
  return h;
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::Index(std::size_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = NextU64();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double Rng::Normal() {
  // Box-Muller; 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::Laplace(double b) {
  const double u = Uniform() - 0.5;
  const double mag = 1.0 - 2.0 * std::fabs(u);
  if (mag <= 0.0) return 0.0;
  return (u < 0 ? 1.0 : -1.0) * b * std::log(mag);
}

}  // namespace ats
