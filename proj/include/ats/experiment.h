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

#ifndef ATS_EXPERIMENT_H_
#define ATS_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ats/attack.h"
#include "ats/config.h"
#include "ats/dataset.h"
#include "ats/defense.h"
#include "ats/hybrid.h"
#include "ats/nn.h"
#include "ats/search.h"

namespace ats {

struct ExperimentData {
  Dataset train;
  Dataset eval;
};

// Synthetic splits (the eval split uses a derived seed) or image folders.
ExperimentData LoadExperimentData(const ExperimentConfig& cfg);

// `count` distinct sample indices drawn with `seed`.
std::vector<std::size_t> TargetIndices(const Dataset& data, std::size_t count,
                                       std::uint64_t seed);

struct AttackTrial {
  std::size_t index = 0;
  int label = 0;
  Tensor original;
  Tensor transformed;  // what the participant trained on
  AttackResult result;
  double psnr = 0.0;   // reconstruction vs transformed
};

// One participant shares the gradient of a single (optionally transformed)
// sample, optionally defended; the adversary reconstructs it.
AttackTrial RunAttackTrial(const Model& model, const ModelParams& params, const Dataset& data,
                           std::size_t index, const PolicySet* policies,
                           const std::optional<DefenseSpec>& defense, AttackConfig attack,
                           std::uint64_t seed);

// M^s (semi-trained) and M^r (random) models used by the policy search,
// seeded from the search seed.
struct SearchModels {
  ModelParams semi_trained;
  ModelParams random;
};
SearchModels MakeSearchModels(const ExperimentConfig& cfg, const Model& model,
                              const Dataset& train);

// Images side by side with a one-pixel white gap; gray images are widened
// to RGB when mixed with colour ones.
Tensor SideBySide(std::span<const Tensor> images);

}  // namespace ats

#endif  // ATS_EXPERIMENT_H_
