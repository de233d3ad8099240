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

#ifndef ATS_ATTACK_H_
#define ATS_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ats/nn.h"
#include "ats/optim.h"
#include "ats/tensor.h"

namespace ats {

enum class DistanceKind { kL2, kL1, kCosine };
enum class OptimizerKind { kAdam, kSgd, kLbfgs };
enum class InitKind { kGaussian, kBlack, kFromImage };
enum class LabelMode { kKnown, kOptimizeSoft };

std::string_view DistanceName(DistanceKind kind);
std::string_view OptimizerName(OptimizerKind kind);
std::string_view InitName(InitKind kind);
std::optional<DistanceKind> ParseDistance(std::string_view name);
std::optional<OptimizerKind> ParseOptimizer(std::string_view name);
std::optional<InitKind> ParseInit(std::string_view name);

// l2: squared Euclidean distance of the flattened vectors; l1: sum of
// absolute differences; cosine: 1 - cos. Zero-norm operands of the cosine
// distance raise NumericalError.
Tensor GradientDistance(const GradientVector& a, const GradientVector& b,
                        DistanceKind kind);

// Anisotropic total variation of a [C, H, W] image.
Tensor TotalVariation(const Tensor& x);

// Standard normal pixels clamped to [0, 1].
Tensor GaussianStart(const Shape& shape, std::uint64_t seed);

struct AttackConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  DistanceKind distance = DistanceKind::kCosine;
  std::size_t iterations = 4800;
  double tv_weight = 1e-4;
  InitKind init = InitKind::kGaussian;
  std::optional<Tensor> init_image;  // for InitKind::kFromImage
  LabelMode label_mode = LabelMode::kKnown;
  std::size_t restarts = 1;
  double learning_rate = 0.1;  // adam and sgd
  bool lr_decay = true;
  double sgd_momentum = 0.0;
  AdamOptions adam;
  LbfgsOptions lbfgs;
  std::uint64_t seed = 0;
  // Per-layer similarity to the target every this many iterations; 0 = off.
  std::size_t layer_trace_every = 0;

  // 300 iterations and 16 restarts for lbfgs, otherwise the defaults above.
  static AttackConfig For(OptimizerKind optimizer, DistanceKind distance);
  void Validate() const;
};

struct TracePoint {
  std::size_t iteration;
  double objective;
  // PSNR of the best iterate so far against the reference image, if given.
  std::optional<double> psnr;
};

struct LayerTrace {
  std::vector<std::string> layers;
  std::vector<std::size_t> iterations;
  std::vector<std::vector<std::optional<double>>> similarity;
};

struct RestartSummary {
  bool diverged = false;
  double objective = 0.0;
};

struct AttackResult {
  Tensor reconstruction;
  std::optional<Tensor> soft_label;  // LabelMode::kOptimizeSoft only
  double objective = 0.0;
  double distance = 0.0;
  std::optional<double> psnr;
  std::size_t best_restart = 0;
  std::vector<TracePoint> trace;  // of the best restart
  LayerTrace layer_trace;         // of the best restart
  std::vector<RestartSummary> restarts;
};

// What the adversary observes, plus an optional reference image used only
// for reporting PSNR.
struct AttackTarget {
  GradientVector gradient;
  std::optional<int> label;
  std::optional<Tensor> reference;
};

// The attack objective at image x (and, in soft-label mode, label logits),
// with its gradient with respect to x and the logits.
struct ObjectiveValue {
  double objective;
  double distance;
  Tensor grad_x;
  std::optional<Tensor> grad_logits;
};
ObjectiveValue EvaluateAttackObjective(const Model& model,
                                       const ModelParams& params,
                                       const AttackTarget& target,
                                       const AttackConfig& cfg, const Tensor& x,
                                       const std::optional<Tensor>& logits = {});

// Optimizes a dummy input (and, in soft-label mode, a dummy label) so that
// its gradient matches `target.gradient`. Each restart returns its best
// iterate; the restart with the lowest objective wins.
AttackResult Reconstruct(const Model& model, const ModelParams& params,
                         const AttackTarget& target, const AttackConfig& cfg);

}  // namespace ats

#endif  // ATS_ATTACK_H_
