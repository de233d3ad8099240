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
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ats/tensor.h"
#include "fmt/format.h"
#include "tensor/internal.h"

namespace ats {
namespace {

using Grads = std::vector<std::optional<Tensor>>;

// Input gradients of one node given the gradient of its output. Rules are
// written with the public ops, so with tracked operands they extend the graph.
Grads Rule(const Node& node, std::span<const Tensor> in, const Tensor& out,
           const Tensor& g) {
  const OpAttrs& at = node.attrs;
  switch (node.op) {
    case OpKind::kLeaf:
    case OpKind::kConstant:
      return {};
    case OpKind::kAdd:
      return {g, g};
    case OpKind::kSub:
      return {g, Neg(g)};
    case OpKind::kMul:
      return {Mul(g, in[1]), Mul(g, in[0])};
    case OpKind::kScale:
      return {Scale(g, at.scalar)};
    case OpKind::kShift:
      return {g};
    case OpKind::kMatMul:
      return {MatMul(g, Transpose(in[1])), MatMul(Transpose(in[0]), g)};
    case OpKind::kTranspose:
      return {Transpose(g)};
    case OpKind::kConvValid: {
      const std::size_t kh = in[1].shape()[2], kw = in[1].shape()[3];
      Tensor gx = internal::ConvValid(Pad2d(g, kh - 1, kw - 1),
                                      internal::FlipKernel(in[1]));
      Tensor gw = internal::Swap01(
          internal::ConvValid(internal::Swap01(in[0]), internal::Swap01(g)));
      return {gx, gw};
    }
    case OpKind::kPad2d:
      return {Crop2d(g, at.a, at.b)};
    case OpKind::kCrop2d:
      return {Pad2d(g, at.a, at.b)};
    case OpKind::kFlipKernel:
      return {internal::FlipKernel(g)};
    case OpKind::kSwap01:
      return {internal::Swap01(g)};
    case OpKind::kRelu:
      return {Mul(g, Step(in[0]))};
    case OpKind::kStep:
    case OpKind::kSign:
      return {std::nullopt};
    case OpKind::kAbs:
      return {Mul(g, Sign(in[0]))};
    case OpKind::kSigmoid:
      return {Mul(g, Mul(out, AddScalar(Neg(out), 1.0)))};
    case OpKind::kExp:
      return {Mul(g, out)};
    case OpKind::kSqrt:
      return {Mul(g, Scale(Reciprocal(out), 0.5))};
    case OpKind::kReciprocal:
      return {Neg(Mul(g, Mul(out, out)))};
    case OpKind::kAvgPool2:
      return {Scale(Upsample2x2(g), 0.25)};
    case OpKind::kUpsample2:
      return {Scale(AvgPool2x2(g), 4.0)};
    case OpKind::kReshape:
      return {Reshape(g, in[0].shape())};
    case OpKind::kLogSoftmax: {
      const Shape& s = in[0].shape();
      const std::size_t rows = s[0], cols = s[1];
      Tensor row_sums = Collapse(g, 1, cols, Shape{rows, 1});
      return {Sub(g, Mul(Exp(out), Expand(row_sums, 1, cols, s)))};
    }
    case OpKind::kExpand:
      return {Collapse(g, at.a, at.b, in[0].shape())};
    case OpKind::kCollapse:
      return {Expand(g, at.a, at.b, in[0].shape())};
    case OpKind::kConcat: {
      Grads grads;
      std::size_t offset = 0;
      for (const Tensor& t : in) {
        grads.push_back(Reshape(Slice(g, offset, t.numel()), t.shape()));
        offset += t.numel();
      }
      return grads;
    }
    case OpKind::kSlice:
      return {Reshape(internal::Embed(g, at.a, in[0].numel()), in[0].shape())};
    case OpKind::kEmbed:
      return {Reshape(Slice(g, at.a, in[0].numel()), in[0].shape())};
  }
  throw Error("backward: unknown op");
}

}  // namespace

std::vector<Tensor> Backward(const Tensor& output, std::span<const Tensor> wrt,
                             bool create_graph) {
  if (!output.tracked()) throw Error("backward: output is not tracked");
  if (output.numel() != 1) {
    throw Error("backward: output must be scalar, got shape " +
                output.shape().ToString());
  }
  Graph& graph = *output.graph();
  const NodeId root = output.node();
  for (const Tensor& w : wrt) {
    if (!w.tracked() || w.graph() != &graph) {
      throw Error("backward: wrt tensor is not part of the output's graph");
    }
  }

  // needed: on some path from a node to the root.
  std::vector<char> needed(root + 1, 0);
  needed[root] = 1;
  for (NodeId id = root + 1; id-- > 0;) {
    if (!needed[id]) continue;
    for (NodeId i : graph.node(id).inputs) needed[i] = 1;
  }
  std::vector<char> is_target(root + 1, 0);
  for (const Tensor& w : wrt) {
    if (w.node() > root || !needed[w.node()]) {
      throw Error(fmt::format(
          "backward: wrt tensor (node {}, shape {}) is unreachable from the "
          "output",
          w.node(), w.shape().ToString()));
    }
    is_target[w.node()] = 1;
  }
  // depends: some wrt tensor lies upstream.
  std::vector<char> depends(root + 1, 0);
  for (NodeId id = 0; id <= root; ++id) {
    if (is_target[id]) {
      depends[id] = 1;
      continue;
    }
    for (NodeId i : graph.node(id).inputs) {
      if (depends[i]) {
        depends[id] = 1;
        break;
      }
    }
  }

  auto value_of = [&](NodeId id) {
    return create_graph ? graph.Handle(id) : graph.Handle(id).Detach();
  };

  std::vector<std::optional<Tensor>> grads(root + 1);
  grads[root] = Tensor::Full(output.shape(), 1.0);
  for (NodeId id = root + 1; id-- > 0;) {
    if (!grads[id] || !depends[id] || !needed[id]) continue;
    // Copy: rules append to the graph and may reallocate its node storage.
    const Node node = graph.node(id);
    if (node.op == OpKind::kLeaf || node.op == OpKind::kConstant) continue;
    std::vector<Tensor> in;
    in.reserve(node.inputs.size());
    for (NodeId i : node.inputs) in.push_back(value_of(i));
    Tensor g = create_graph ? *grads[id] : grads[id]->Detach();
    Grads local = Rule(node, in, value_of(id), g);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const NodeId input = node.inputs[k];
      if (!depends[input] || k >= local.size() || !local[k]) continue;
      grads[input] = grads[input] ? Add(*grads[input], *local[k]) : *local[k];
    }
  }

  std::vector<Tensor> result;
  result.reserve(wrt.size());
  for (const Tensor& w : wrt) {
    if (grads[w.node()]) {
      result.push_back(create_graph ? *grads[w.node()]
                                    : grads[w.node()]->Detach());
    } else {
      result.push_back(Tensor::Zeros(w.shape()));
    }
  }
  return result;
}

Tensor Backward(const Tensor& output, const Tensor& wrt, bool create_graph) {
  std::array<Tensor, 1> w{wrt};
  return Backward(output, w, create_graph)[0];
}

Tensor FiniteDiffGradient(const std::function<double(const Tensor&)>& f,
                          const Tensor& x, double h) {
  if (!(h > 0.0)) throw Error("finite differences need h > 0");
  std::vector<double> base = x.Detach().ToVector();
  std::vector<double> grad(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> plus = base, minus = base;
    plus[i] += h;
    minus[i] -= h;
    const double fp = f(Tensor(x.shape(), std::move(plus)));
    const double fm = f(Tensor(x.shape(), std::move(minus)));
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error(fmt::format("finite differences: non-finite value at "
                              "coordinate {}",
                              i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return Tensor(x.shape(), std::move(grad));
}

}  // namespace ats
