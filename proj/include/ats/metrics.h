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

#ifndef ATS_METRICS_H_
#define ATS_METRICS_H_

#include <optional>
#include <span>
#include <vector>

#include "ats/nn.h"
#include "ats/tensor.h"

namespace ats {

inline constexpr double kPsnrCap = 100.0;

double MeanSquaredError(const Tensor& a, const Tensor& b);
// Peak value 1; identical inputs give kPsnrCap.
double Psnr(const Tensor& a, const Tensor& b);

double Pearson(std::span<const double> xs, std::span<const double> ys);

// Throws NumericalError when either operand has zero norm.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// Cosine similarity of the parameter gradients produced by x1 and x2 under
// the same label.
double GradSim(const Model& model, const ModelParams& params, const Tensor& x1,
               const Tensor& x2, int label);

// Per-layer cosine similarity; empty where either layer gradient is zero.
std::vector<std::optional<double>> LayerwiseSimilarity(
    const GradientVector& a, const GradientVector& b);

}  // namespace ats

#endif  // ATS_METRICS_H_
