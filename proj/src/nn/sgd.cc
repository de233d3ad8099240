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

#include "ats/sgd.h"

#include <cmath>

#include "fmt/format.h"

namespace ats {

ModelParams SgdUpdate(const ModelParams& params, const GradientVector& grads,
                      SgdState& state, double lr, const SgdOptions& options) {
  if (grads.size() != params.size()) {
    throw Error(fmt::format("sgd: {} gradients for {} parameters", grads.size(),
                            params.size()));
  }
  if (state.velocity.empty()) {
    for (const auto& p : params.layers) state.velocity.emplace_back(p.value.numel(), 0.0);
  }
  ModelParams out = params;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const Tensor& w = params.layers[l].value;
    const Tensor& g = grads.layers[l];
    if (g.shape() != w.shape()) {
      throw Error(fmt::format("sgd: gradient shape {} for parameter {} of shape {}",
                              g.shape().ToString(), params.layers[l].name,
                              w.shape().ToString()));
    }
    std::vector<double>& v = state.velocity[l];
    std::vector<double> next(w.numel());
    for (std::size_t i = 0; i < w.numel(); ++i) {
      const double d = g.at(i) + options.weight_decay * w.at(i);
      v[i] = options.momentum * v[i] + d;
      next[i] = w.at(i) - lr * v[i];
      if (!std::isfinite(next[i])) {
        throw NumericalError(fmt::format("sgd: non-finite update in {}",
                                         params.layers[l].name));
      }
    }
    out.layers[l].value = Tensor(w.shape(), std::move(next));
  }
  return out;
}

}  // namespace ats
