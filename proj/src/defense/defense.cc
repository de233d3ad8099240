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

#include "ats/defense.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ats/random.h"
#include "fmt/format.h"

namespace ats {

DefenseSpec DefenseSpec::Prune(double ratio) {
  DefenseSpec s;
  s.kind = DefenseKind::kPrune;
  s.parameter = ratio;
  s.Validate();
  return s;
}

DefenseSpec DefenseSpec::Gaussian(double scale, std::uint64_t seed) {
  DefenseSpec s;
  s.kind = DefenseKind::kGaussian;
  s.parameter = scale;
  s.seed = seed;
  s.Validate();
  return s;
}

DefenseSpec DefenseSpec::Laplacian(double scale, std::uint64_t seed) {
  DefenseSpec s;
  s.kind = DefenseKind::kLaplacian;
  s.parameter = scale;
  s.seed = seed;
  s.Validate();
  return s;
}

void DefenseSpec::Validate() const {
  if (kind == DefenseKind::kPrune) {
    if (!(parameter >= 0.0 && parameter <= 1.0)) {
      throw Error(fmt::format("defense: pruning ratio {} outside [0, 1]", parameter));
    }
  } else if (!(parameter > 0.0) || !std::isfinite(parameter)) {
    throw Error(fmt::format("defense: noise scale {} must be positive", parameter));
  }
}

std::string DefenseSpec::ToString() const {
  const char* name = kind == DefenseKind::kPrune      ? "prune"
                     : kind == DefenseKind::kGaussian ? "gaussian"
                                                      : "laplacian";
  return fmt::format("{}:{}", name, parameter);
}

DefenseSpec ParseDefense(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(fmt::format("defense '{}': expected kind:value", text));
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string value(text.substr(colon + 1));
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size()) {
    throw Error(fmt::format("defense '{}': '{}' is not a number", text, value));
  }
  if (kind == "prune") return DefenseSpec::Prune(v);
  if (kind == "gaussian") return DefenseSpec::Gaussian(v);
  if (kind == "laplacian") return DefenseSpec::Laplacian(v);
  throw Error(fmt::format("defense '{}': unknown kind '{}'", text, kind));
}

std::size_t PruneKeepCount(std::size_t n, double ratio) {
  // The epsilon keeps exact products such as 0.3 * 10 from rounding up.
  const double keep = std::ceil((1.0 - ratio) * static_cast<double>(n) - 1e-9);
  return static_cast<std::size_t>(std::clamp(keep, 0.0, static_cast<double>(n)));
}

GradientVector PruneGradients(const GradientVector& g, double ratio) {
  DefenseSpec::Prune(ratio);
  GradientVector out;
  for (const Tensor& layer : g.layers) {
    const std::size_t n = layer.numel();
    const std::size_t keep = PruneKeepCount(n, ratio);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::fabs(layer.at(a)) > std::fabs(layer.at(b));
    });
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < keep; ++i) v[order[i]] = layer.at(order[i]);
    out.layers.emplace_back(layer.shape(), std::move(v));
  }
  return out;
}

GradientVector NoiseGradients(const GradientVector& g, const DefenseSpec& spec) {
  spec.Validate();
  if (spec.kind == DefenseKind::kPrune) throw Error("defense: pruning is not a noise defense");
  GradientVector out;
  for (std::size_t l = 0; l < g.size(); ++l) {
    const Tensor& layer = g.layers[l];
    Rng rng(DeriveSeed(spec.seed, {0xD9, l}));
    std::vector<double> v = layer.ToVector();
    if (spec.kind == DefenseKind::kGaussian) {
      const double sd =
          spec.gaussian_scale_is_std ? spec.parameter : std::sqrt(spec.parameter);
      for (double& x : v) x += sd * rng.Normal();
    } else {
      for (double& x : v) x += rng.Laplace(spec.parameter);
    }
    out.layers.emplace_back(layer.shape(), std::move(v));
  }
  return out;
}

GradientVector ApplyDefense(const GradientVector& g, const DefenseSpec& spec) {
  if (spec.kind == DefenseKind::kPrune) return PruneGradients(g, spec.parameter);
  return NoiseGradients(g, spec);
}

}  // namespace ats
