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

#ifndef ATS_SCORES_H_
#define ATS_SCORES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ats/dataset.h"
#include "ats/nn.h"
#include "ats/sgd.h"
#include "ats/tensor.h"
#include "ats/transforms.h"

namespace ats {

inline constexpr std::size_t kDefaultIntegrationSteps = 8;
inline constexpr double kAccuracyEpsilon = 1e-5;

// Seed key derived from an image's values and label, so that per-sample
// randomness follows the sample rather than its position in a dataset.
std::uint64_t SampleKey(const Tensor& image, int label);

struct GradSimPoint {
  double i;
  double similarity;
};

// GradSim(x'(j/K), target) for j = 0..K-1 along x'(i) = (1 - i) x0 + i target.
std::vector<GradSimPoint> GradSimCurve(const Model& model, const ModelParams& params,
                                       const Tensor& x0, const Tensor& target,
                                       int label, std::size_t steps);

struct PrivacyScoreOptions {
  std::size_t steps = kDefaultIntegrationSteps;
};

// The GradSim curve of every sample from a gaussian start to the transformed
// sample; empty where the sample's gradients vanish.
std::vector<std::optional<std::vector<GradSimPoint>>> PrivacyCurves(
    const Model& model, const ModelParams& semi_trained, const Policy& policy,
    const Dataset& samples, const PrivacyScoreOptions& options, std::uint64_t seed);

// Mean area under the GradSim curve from a gaussian start to the
// transformed sample, over all samples. Samples whose gradients vanish are
// skipped with a warning.
double PrivacyScore(const Model& model, const ModelParams& semi_trained,
                    const Policy& policy, const Dataset& samples,
                    const PrivacyScoreOptions& options, std::uint64_t seed);

// Rows are d(sum of logits)/dx for every sample of a [N, C, H, W] batch.
Tensor InputJacobian(const Model& model, const ModelParams& params, const Tensor& batch);

// -(1/N) sum_i [log(s_i + eps) + 1 / (s_i + eps)] over the eigenvalues s_i of
// the row correlation matrix of `jacobian` ([N, D]).
double JacobianScore(const Tensor& jacobian, double eps = kAccuracyEpsilon);
// The same functional for given eigenvalues.
double EigenvalueScore(const std::vector<double>& eigenvalues,
                       double eps = kAccuracyEpsilon);

struct AccuracyScoreOptions {
  std::size_t batch = 32;
  std::size_t rounds = 10;
  double learning_rate = 0.1;
  SgdOptions sgd{0.0, 0.0};
};

// Scores a fresh batch per round, then takes one training step of the
// random model on it; returns the mean over rounds.
double AccuracyScore(const Model& model, const ModelParams& random_model,
                     const Policy& policy, const Dataset& data,
                     const AccuracyScoreOptions& options, std::uint64_t seed);

}  // namespace ats

#endif  // ATS_SCORES_H_
