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

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ats/tensor.h"
#include "fmt/format.h"
#include "fmt/ranges.h"
#include "tensor/internal.h"

namespace ats {

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) {
  for (std::size_t d : dims_) {
    if (d == 0) throw Error("shape extents must be positive: " + ToString());
  }
}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw Error("shape extents must be positive: " + ToString());
  }
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

std::string Shape::ToString() const {
  return fmt::format("[{}]", fmt::join(dims_, ", "));
}

Tensor::Tensor()
    : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)) {
  if (shape_.numel() != values.size()) {
    throw Error(fmt::format("tensor of shape {} needs {} values, got {}",
                            shape_.ToString(), shape_.numel(), values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("tensor values must be finite");
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor::Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data,
               Graph* graph, NodeId node)
    : shape_(std::move(shape)),
      data_(std::move(data)),
      graph_(graph),
      node_(node) {}

Tensor Tensor::Scalar(double v) { return Tensor(Shape{}, {v}); }

Tensor Tensor::Zeros(const Shape& shape) { return Full(shape, 0.0); }

Tensor Tensor::Full(const Shape& shape, double v) {
  return Tensor(shape, std::vector<double>(shape.numel(), v));
}

double Tensor::item() const {
  if (numel() != 1) {
    throw Error("item() needs a single-element tensor, got shape " +
                shape_.ToString());
  }
  return (*data_)[0];
}

Tensor Tensor::Detach() const { return Tensor(shape_, data_, nullptr, kNoNode); }

const char* OpName(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kShift: return "shift";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kConvValid: return "conv2d";
    case OpKind::kPad2d: return "pad2d";
    case OpKind::kCrop2d: return "crop2d";
    case OpKind::kFlipKernel: return "flip_kernel";
    case OpKind::kSwap01: return "swap01";
    case OpKind::kRelu: return "relu";
    case OpKind::kStep: return "step";
    case OpKind::kSign: return "sign";
    case OpKind::kAbs: return "abs";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kReciprocal: return "reciprocal";
    case OpKind::kAvgPool2: return "avgpool2x2";
    case OpKind::kUpsample2: return "upsample2x2";
    case OpKind::kReshape: return "reshape";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kExpand: return "expand";
    case OpKind::kCollapse: return "collapse";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kEmbed: return "embed";
  }
  return "unknown";
}

Tensor Graph::Variable(const Tensor& value) {
  if (value.tracked()) {
    throw Error("Variable() expects an untracked tensor; call Detach() first");
  }
  Node node;
  node.op = OpKind::kLeaf;
  node.shape = value.shape();
  node.value = value.data_;
  return Handle(Append(std::move(node)));
}

Tensor Graph::Handle(NodeId id) const {
  const Node& n = nodes_[id];
  return Tensor(n.shape, n.value, const_cast<Graph*>(this), id);
}

NodeId Graph::Lift(const Tensor& t) {
  Node node;
  node.op = OpKind::kConstant;
  node.shape = t.shape();
  node.value = t.data_;
  return Append(std::move(node));
}

NodeId Graph::Append(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

Tensor Graph::Apply(OpKind op, const OpAttrs& attrs,
                    std::span<const Tensor> inputs) {
  Graph* graph = nullptr;
  for (const Tensor& t : inputs) {
    if (!t.tracked()) continue;
    if (graph == nullptr) {
      graph = t.graph_;
    } else if (graph != t.graph_) {
      throw Error(fmt::format("{}: inputs belong to different graphs",
                              OpName(op)));
    }
  }
  internal::Evaluated result = internal::Evaluate(op, attrs, inputs);
  for (double v : result.data) {
    if (!std::isfinite(v)) {
      throw NumericalError(fmt::format("{}: non-finite output", OpName(op)));
    }
  }
  Tensor out(std::move(result.shape),
             std::make_shared<const std::vector<double>>(std::move(result.data)),
             nullptr, kNoNode);
  if (graph == nullptr) return out;

  Node node;
  node.op = op;
  node.attrs = attrs;
  node.shape = out.shape();
  node.value = out.data_;
  node.inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    node.inputs.push_back(t.tracked() ? t.node_ : graph->Lift(t));
  }
  return graph->Handle(graph->Append(std::move(node)));
}

Tensor Graph::Replay(NodeId target) const {
  if (target >= nodes_.size()) throw Error("Replay: node id out of range");
  std::vector<Tensor> values;
  values.reserve(target + 1);
  for (NodeId id = 0; id <= target; ++id) {
    const Node& n = nodes_[id];
    if (n.op == OpKind::kLeaf || n.op == OpKind::kConstant) {
      values.push_back(Tensor(n.shape, n.value, nullptr, kNoNode));
      continue;
    }
    std::vector<Tensor> in;
    in.reserve(n.inputs.size());
    for (NodeId i : n.inputs) in.push_back(values[i]);
    internal::Evaluated r = internal::Evaluate(n.op, n.attrs, in);
    values.push_back(Tensor(
        std::move(r.shape),
        std::make_shared<const std::vector<double>>(std::move(r.data)),
        nullptr, kNoNode));
  }
  return values.back();
}

}  // namespace ats
