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

#ifndef ATS_DEFENSE_H_
#define ATS_DEFENSE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "ats/nn.h"

namespace ats {

enum class DefenseKind { kPrune, kGaussian, kLaplacian };

struct DefenseSpec {
  DefenseKind kind = DefenseKind::kPrune;
  // Pruning ratio for kPrune, noise scale otherwise.
  double parameter = 0.0;
  // Gaussian scale is a variance unless this is set.
  bool gaussian_scale_is_std = false;
  std::uint64_t seed = 0;

  static DefenseSpec Prune(double ratio);
  static DefenseSpec Gaussian(double scale, std::uint64_t seed = 0);
  static DefenseSpec Laplacian(double scale, std::uint64_t seed = 0);
  void Validate() const;
  // "prune:0.95", "gaussian:0.001", "laplacian:0.01"
  std::string ToString() const;
};

// Accepts the ToString() form.
DefenseSpec ParseDefense(std::string_view text);

// Number of entries a layer of n values keeps under `ratio`:
// ceil((1 - ratio) n).
std::size_t PruneKeepCount(std::size_t n, double ratio);

// Per layer, keeps the PruneKeepCount largest-magnitude entries (lower flat
// index first among ties) and zeroes the rest.
GradientVector PruneGradients(const GradientVector& g, double ratio);

// Adds i.i.d. noise to every entry; each layer draws from its own stream.
GradientVector NoiseGradients(const GradientVector& g, const DefenseSpec& spec);

GradientVector ApplyDefense(const GradientVector& g, const DefenseSpec& spec);

}  // namespace ats

#endif  // ATS_DEFENSE_H_
