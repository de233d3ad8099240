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

#ifndef ATS_RANDOM_H_
#define ATS_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ats {

// Mixes a root seed with stream identifiers (splitmix64 finalizer), so that
// every consumer of randomness gets an independent, reproducible stream.
std::uint64_t DeriveSeed(std::uint64_t root,
                         std::initializer_list<std::uint64_t> streams);

// Seeded generator. The conversions to doubles and indices are written out
// here rather than taken from <random> distributions, whose outputs are not
// specified across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform in [0, n).
  std::size_t Index(std::size_t n);
  double Normal();
  // Laplace(0, b).
  double Laplace(double b);
  bool Coin() { return (NextU64() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ats

#endif  // ATS_RANDOM_H_
