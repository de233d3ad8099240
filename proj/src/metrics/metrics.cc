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

#include "ats/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fmt/format.h"

namespace ats {

double MeanSquaredError(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw Error(fmt::format("mse: shape mismatch {} vs {}", a.shape().ToString(),
                            b.shape().ToString()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a.at(i) - b.at(i);
    sum += d * d;
  }
  return sum / static_cast<double>(a.numel());
}

double Psnr(const Tensor& a, const Tensor& b) {
  const double mse = MeanSquaredError(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(fmt::format("pearson: lengths differ ({} vs {})", xs.size(),
                            ys.size()));
  }
  if (xs.size() < 3) throw Error("pearson: need at least 3 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("cosine: lengths differ ({} vs {})", a.size(),
                            b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0) throw NumericalError("cosine: first operand has zero norm");
  if (nb == 0.0) throw NumericalError("cosine: second operand has zero norm");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double GradSim(const Model& model, const ModelParams& params, const Tensor& x1,
               const Tensor& x2, int label) {
  const Labels y = Labels::Single(label);
  const Tensor g1 = FlattenGrads(model.LossGradients(params, x1, y));
  const Tensor g2 = FlattenGrads(model.LossGradients(params, x2, y));
  return CosineSimilarity(g1.values(), g2.values());
}

std::vector<std::optional<double>> LayerwiseSimilarity(
    const GradientVector& a, const GradientVector& b) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("layerwise similarity: {} vs {} layers", a.size(),
                            b.size()));
  }
  std::vector<std::optional<double>> out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) {
    try {
      out[l] = CosineSimilarity(a.layers[l].values(), b.layers[l].values());
    } catch (const NumericalError&) {
    }
  }
  return out;
}

}  // namespace ats
