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

#ifndef ATS_SRC_TENSOR_INTERNAL_H_
#define ATS_SRC_TENSOR_INTERNAL_H_

#include <span>
#include <vector>

#include "ats/tensor.h"

namespace ats::internal {

struct Evaluated {
  Shape shape;
  std::vector<double> data;
};

// Pure forward evaluation of one op. Does not check finiteness.
Evaluated Evaluate(OpKind op, const OpAttrs& attrs, std::span<const Tensor> in);

// Ops that only appear inside backward rules.
Tensor ConvValid(const Tensor& input, const Tensor& kernel);
Tensor FlipKernel(const Tensor& kernel);
Tensor Swap01(const Tensor& a);
Tensor Embed(const Tensor& a, std::size_t offset, std::size_t total);

}  // namespace ats::internal

#endif  // ATS_SRC_TENSOR_INTERNAL_H_
