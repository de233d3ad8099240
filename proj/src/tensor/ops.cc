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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ats/tensor.h"
#include "fmt/format.h"
#include "tensor/internal.h"

namespace ats {
namespace {

Tensor Apply1(OpKind op, const Tensor& a, OpAttrs attrs = {}) {
  std::array<Tensor, 1> in{a};
  return Graph::Apply(op, attrs, in);
}

Tensor Apply2(OpKind op, const Tensor& a, const Tensor& b, OpAttrs attrs = {}) {
  std::array<Tensor, 2> in{a, b};
  return Graph::Apply(op, attrs, in);
}

// Elementwise binary op with single-element broadcasting on either side.
Tensor Broadcasting(OpKind op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Apply2(op, a, b);
  if (a.numel() == 1 && b.numel() > 1) {
    return Apply2(op, Expand(a, 1, b.numel(), b.shape()), b);
  }
  if (b.numel() == 1 && a.numel() > 1) {
    return Apply2(op, a, Expand(b, 1, a.numel(), a.shape()));
  }
  if (a.numel() == b.numel() && a.numel() == 1) {
    return Apply2(op, a, Reshape(b, a.shape()));
  }
  throw Error(fmt::format("{}: shape mismatch {} vs {}", OpName(op),
                          a.shape().ToString(), b.shape().ToString()));
}

OpAttrs WithScalar(double c) {
  OpAttrs at;
  at.scalar = c;
  return at;
}

OpAttrs WithPair(std::size_t a, std::size_t b) {
  OpAttrs at;
  at.a = a;
  at.b = b;
  return at;
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  return Broadcasting(OpKind::kAdd, a, b);
}
Tensor Sub(const Tensor& a, const Tensor& b) {
  return Broadcasting(OpKind::kSub, a, b);
}
Tensor Mul(const Tensor& a, const Tensor& b) {
  return Broadcasting(OpKind::kMul, a, b);
}
Tensor Scale(const Tensor& a, double c) {
  return Apply1(OpKind::kScale, a, WithScalar(c));
}
Tensor AddScalar(const Tensor& a, double c) {
  return Apply1(OpKind::kShift, a, WithScalar(c));
}
Tensor Neg(const Tensor& a) { return Scale(a, -1.0); }

Tensor DivScalarTensor(const Tensor& a, const Tensor& b) {
  if (b.numel() != 1) {
    throw Error("divide: divisor must have one element, got shape " +
                b.shape().ToString());
  }
  return Mul(a, Reciprocal(b));
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  return Apply2(OpKind::kMatMul, a, b);
}
Tensor Transpose(const Tensor& a) { return Apply1(OpKind::kTranspose, a); }

Tensor Conv2d(const Tensor& input, const Tensor& kernel, std::size_t padding) {
  if (input.shape().rank() != 4 || kernel.shape().rank() != 4) {
    throw Error(fmt::format("conv2d: expected NCHW input and OCHW kernel, got "
                            "{} and {}",
                            input.shape().ToString(),
                            kernel.shape().ToString()));
  }
  if (padding == 0) return internal::ConvValid(input, kernel);
  return internal::ConvValid(Pad2d(input, padding, padding), kernel);
}

Tensor Pad2d(const Tensor& input, std::size_t pad_h, std::size_t pad_w) {
  return Apply1(OpKind::kPad2d, input, WithPair(pad_h, pad_w));
}
Tensor Crop2d(const Tensor& input, std::size_t pad_h, std::size_t pad_w) {
  return Apply1(OpKind::kCrop2d, input, WithPair(pad_h, pad_w));
}
Tensor AvgPool2x2(const Tensor& input) {
  return Apply1(OpKind::kAvgPool2, input);
}
Tensor Upsample2x2(const Tensor& input) {
  return Apply1(OpKind::kUpsample2, input);
}

Tensor Relu(const Tensor& a) { return Apply1(OpKind::kRelu, a); }
Tensor Sigmoid(const Tensor& a) { return Apply1(OpKind::kSigmoid, a); }
Tensor Exp(const Tensor& a) { return Apply1(OpKind::kExp, a); }
Tensor Sqrt(const Tensor& a) { return Apply1(OpKind::kSqrt, a); }
Tensor Reciprocal(const Tensor& a) { return Apply1(OpKind::kReciprocal, a); }
Tensor Abs(const Tensor& a) { return Apply1(OpKind::kAbs, a); }
Tensor Step(const Tensor& a) { return Apply1(OpKind::kStep, a); }
Tensor Sign(const Tensor& a) { return Apply1(OpKind::kSign, a); }

Tensor Sum(const Tensor& a) { return Collapse(a, 1, a.numel(), Shape{}); }
Tensor Mean(const Tensor& a) {
  return Scale(Sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor Reshape(const Tensor& a, const Shape& shape) {
  OpAttrs at;
  at.shape = shape;
  return Apply1(OpKind::kReshape, a, at);
}

Tensor Flatten(const Tensor& a) {
  const Shape& s = a.shape();
  if (s.rank() <= 1) return Reshape(a, Shape{1, a.numel()});
  return Reshape(a, Shape{s[0], a.numel() / s[0]});
}

Tensor Expand(const Tensor& a, std::size_t outer, std::size_t inner,
              const Shape& out_shape) {
  OpAttrs at = WithPair(outer, inner);
  at.shape = out_shape;
  return Apply1(OpKind::kExpand, a, at);
}

Tensor Collapse(const Tensor& a, std::size_t outer, std::size_t inner,
                const Shape& out_shape) {
  OpAttrs at = WithPair(outer, inner);
  at.shape = out_shape;
  return Apply1(OpKind::kCollapse, a, at);
}

Tensor LogSoftmax(const Tensor& logits) {
  return Apply1(OpKind::kLogSoftmax, logits);
}
Tensor Softmax(const Tensor& logits) { return Exp(LogSoftmax(logits)); }

Tensor CrossEntropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.shape().rank() != 2 || logits.shape()[0] != labels.size()) {
    throw Error(fmt::format("cross_entropy: logits {} vs {} labels",
                            logits.shape().ToString(), labels.size()));
  }
  const std::size_t classes = logits.shape()[1];
  std::vector<double> onehot(logits.numel(), 0.0);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= classes) {
      throw Error(fmt::format("cross_entropy: class index {} outside [0, {})",
                              labels[b], classes));
    }
    onehot[b * classes + static_cast<std::size_t>(labels[b])] = 1.0;
  }
  return SoftCrossEntropy(logits, Tensor(logits.shape(), std::move(onehot)));
}

Tensor SoftCrossEntropy(const Tensor& logits, const Tensor& targets) {
  if (logits.shape().rank() != 2 || logits.shape() != targets.shape()) {
    throw Error(fmt::format("cross_entropy: logits {} vs targets {}",
                            logits.shape().ToString(),
                            targets.shape().ToString()));
  }
  const double batch = static_cast<double>(logits.shape()[0]);
  return Scale(Sum(Mul(targets, LogSoftmax(logits))), -1.0 / batch);
}

Tensor L1Norm(const Tensor& a) { return Sum(Abs(a)); }
Tensor L2Norm(const Tensor& a) { return Sqrt(Sum(Mul(a, a))); }

Tensor Dot(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel()) {
    throw Error(fmt::format("dot: shape mismatch {} vs {}",
                            a.shape().ToString(), b.shape().ToString()));
  }
  if (a.shape() == b.shape()) return Sum(Mul(a, b));
  return Sum(Mul(a, Reshape(b, a.shape())));
}

Tensor Concat(std::span<const Tensor> parts) {
  return Graph::Apply(OpKind::kConcat, OpAttrs{}, parts);
}

Tensor Slice(const Tensor& a, std::size_t offset, std::size_t length) {
  return Apply1(OpKind::kSlice, a, WithPair(offset, length));
}

namespace internal {

Tensor ConvValid(const Tensor& input, const Tensor& kernel) {
  return Apply2(OpKind::kConvValid, input, kernel);
}
Tensor FlipKernel(const Tensor& kernel) {
  return Apply1(OpKind::kFlipKernel, kernel);
}
Tensor Swap01(const Tensor& a) { return Apply1(OpKind::kSwap01, a); }
Tensor Embed(const Tensor& a, std::size_t offset, std::size_t total) {
  return Apply1(OpKind::kEmbed, a, WithPair(offset, total));
}

}  // namespace internal
}  // namespace ats
