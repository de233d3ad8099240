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

#ifndef ATS_SGD_H_
#define ATS_SGD_H_

#include <vector>

#include "ats/nn.h"

namespace ats {

struct SgdOptions {
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

// Momentum buffers, one per parameter tensor; empty until the first step.
struct SgdState {
  std::vector<std::vector<double>> velocity;
};

// d = g + wd * w; v = momentum * v + d; w = w - lr * v.
ModelParams SgdUpdate(const ModelParams& params, const GradientVector& grads,
                      SgdState& state, double lr, const SgdOptions& options);

}  // namespace ats

#endif  // ATS_SGD_H_
