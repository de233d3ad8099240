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

#ifndef ATS_TENSOR_H_
#define ATS_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ats {

// Raised for every contract violation in the library: shape mismatches,
// non-finite values, malformed files, invalid configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite or otherwise degenerate value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Extents of a dense row-major array. Rank 0 is a scalar.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t numel() const;
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::string ToString() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

class Graph;
using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Immutable dense array of doubles, optionally bound to a node of a Graph.
// Copies share storage. A tracked tensor must not outlive its graph.
class Tensor {
 public:
  // Scalar zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double v);
  static Tensor Zeros(const Shape& shape);
  static Tensor Full(const Shape& shape, double v);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_->size(); }
  std::span<const double> values() const { return *data_; }
  double at(std::size_t i) const { return (*data_)[i]; }
  // Value of a single-element tensor.
  double item() const;
  std::vector<double> ToVector() const { return *data_; }

  bool tracked() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  NodeId node() const { return node_; }

  // Same values, no graph binding.
  Tensor Detach() const;

 private:
  friend class Graph;
  Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data,
         Graph* graph, NodeId node);

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Graph* graph_ = nullptr;
  NodeId node_ = kNoNode;
};

enum class OpKind {
  kLeaf,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kScale,
  kShift,
  kMatMul,
  kTranspose,
  kConvValid,
  kPad2d,
  kCrop2d,
  kFlipKernel,
  kSwap01,
  kRelu,
  kStep,
  kSign,
  kAbs,
  kSigmoid,
  kExp,
  kSqrt,
  kReciprocal,
  kAvgPool2,
  kUpsample2,
  kReshape,
  kLogSoftmax,
  kExpand,
  kCollapse,
  kConcat,
  kSlice,
  kEmbed,
};

const char* OpName(OpKind op);

// Per-node parameters; which fields are meaningful depends on the op.
struct OpAttrs {
  double scalar = 0.0;
  std::size_t a = 0;
  std::size_t b = 0;
  Shape shape;
};

struct Node {
  OpKind op = OpKind::kLeaf;
  std::vector<NodeId> inputs;
  OpAttrs attrs;
  Shape shape;
  std::shared_ptr<const std::vector<double>> value;
};

// Append-only record of the operations applied to tracked tensors. Node
// inputs always precede the node. Backward appends its own nodes, so
// gradients can be differentiated again.
class Graph {
 public:
  explicit Graph(std::uint64_t seed = 0) : seed_(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Registers `value` as a differentiable leaf of this graph.
  Tensor Variable(const Tensor& value);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::uint64_t seed() const { return seed_; }

  // Recomputes every node up to `target` from the leaf and constant values
  // alone, and returns the recomputed value of `target`.
  Tensor Replay(NodeId target) const;

  // Low-level entry point used by the op functions: evaluates `op` on the
  // inputs and, if any input is tracked, appends a node.
  static Tensor Apply(OpKind op, const OpAttrs& attrs,
                      std::span<const Tensor> inputs);

 private:
  friend std::vector<Tensor> Backward(const Tensor&, std::span<const Tensor>,
                                      bool);
  Tensor Handle(NodeId id) const;
  NodeId Lift(const Tensor& t);
  NodeId Append(Node node);

  std::uint64_t seed_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Primitive and composite operations. Every function works on tracked and
// untracked tensors alike; mixing tensors from two graphs is an error.
// Binary elementwise ops accept a single-element operand as a broadcast
// scalar.

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);
Tensor Neg(const Tensor& a);
// a / b with b a single-element tensor.
Tensor DivScalarTensor(const Tensor& a, const Tensor& b);

// [m, k] x [k, n].
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// NCHW input [N, C, H, W], kernel [O, C, kh, kw], stride 1, zero padding.
Tensor Conv2d(const Tensor& input, const Tensor& kernel,
              std::size_t padding = 0);
Tensor Pad2d(const Tensor& input, std::size_t pad_h, std::size_t pad_w);
Tensor Crop2d(const Tensor& input, std::size_t pad_h, std::size_t pad_w);
Tensor AvgPool2x2(const Tensor& input);
Tensor Upsample2x2(const Tensor& input);

Tensor Relu(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
Tensor Exp(const Tensor& a);
Tensor Sqrt(const Tensor& a);
Tensor Reciprocal(const Tensor& a);
Tensor Abs(const Tensor& a);
// Piecewise-constant helpers; their derivative is zero.
Tensor Step(const Tensor& a);
Tensor Sign(const Tensor& a);

Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);
Tensor Reshape(const Tensor& a, const Shape& shape);
// [N, ...] -> [N, prod(...)]; rank-1 input becomes [1, n].
Tensor Flatten(const Tensor& a);

// x of m elements -> outer x m x inner copies, laid out [outer][m][inner].
Tensor Expand(const Tensor& a, std::size_t outer, std::size_t inner,
              const Shape& out_shape);
// Adjoint of Expand: sums the outer and inner axes.
Tensor Collapse(const Tensor& a, std::size_t outer, std::size_t inner,
                const Shape& out_shape);

// Row-wise over a [B, C] tensor.
Tensor LogSoftmax(const Tensor& logits);
Tensor Softmax(const Tensor& logits);
// Mean over the batch of -log softmax(logits)[b, labels[b]].
Tensor CrossEntropy(const Tensor& logits, std::span<const int> labels);
// Mean over the batch of -sum_c targets[b, c] * log softmax(logits)[b, c].
Tensor SoftCrossEntropy(const Tensor& logits, const Tensor& targets);

Tensor L1Norm(const Tensor& a);
Tensor L2Norm(const Tensor& a);
Tensor Dot(const Tensor& a, const Tensor& b);

// Flattens and joins the inputs into one rank-1 tensor.
Tensor Concat(std::span<const Tensor> parts);
Tensor Slice(const Tensor& a, std::size_t offset, std::size_t length);

// d(output)/d(wrt[i]) for a scalar output. With create_graph the results
// are tracked tensors built from primitive ops, so they can themselves be
// differentiated.
std::vector<Tensor> Backward(const Tensor& output, std::span<const Tensor> wrt,
                             bool create_graph = true);
Tensor Backward(const Tensor& output, const Tensor& wrt,
                bool create_graph = true);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
Tensor FiniteDiffGradient(const std::function<double(const Tensor&)>& f,
                          const Tensor& x, double h);

}  // namespace ats

#endif  // ATS_TENSOR_H_
