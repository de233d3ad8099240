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

#ifndef ATS_NN_H_
#define ATS_NN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ats/tensor.h"

namespace ats {

enum class Architecture { kMlp, kConvNet, kSmallResNet };
enum class Activation { kRelu, kSigmoid };

struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 8;
  std::size_t width = 8;

  std::size_t numel() const { return channels * height * width; }
  Shape AsShape() const { return Shape{channels, height, width}; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

// Layer layout per architecture (3x3 convolutions use padding 1):
//   mlp:         [fc -> act] per hidden width, fc -> classes
//   convnet:     [conv3x3 -> act] per channel count, avgpool2x2 (when the
//                spatial extents are even), [fc -> act] if fc_width > 0,
//                fc -> classes
//   smallresnet: conv3x3 stem -> act, `blocks` residual blocks
//                act(x + conv(act(conv(x)))), avgpool2x2, fc -> classes;
//                the width is channels[0] (default 8).
struct ModelConfig {
  Architecture architecture = Architecture::kConvNet;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> channels;
  std::size_t fc_width = 0;
  std::size_t blocks = 1;
  ImageShape input;
  std::size_t classes = 10;
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;

  void Validate() const;

  static ModelConfig Mlp(std::vector<std::size_t> widths, ImageShape input,
                         std::size_t classes, std::uint64_t seed);
  // Desk-scale convnet: two 3x3 conv layers of 8 and 16 channels, pooling
  // and a single fc layer.
  static ModelConfig ConvNet(ImageShape input, std::size_t classes,
                             std::uint64_t seed);
  static ModelConfig SmallResNet(std::size_t blocks, ImageShape input,
                                 std::size_t classes, std::uint64_t seed);
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Parameters in forward order: for every layer its weight, then its bias.
// Immutable snapshot; training produces new instances.
struct ModelParams {
  std::vector<NamedTensor> layers;

  std::size_t size() const { return layers.size(); }
  std::vector<Tensor> Tensors() const;
  std::size_t NumParameters() const;
  static ModelParams FromTensors(const ModelParams& like,
                                 std::vector<Tensor> values);
};

// Per-layer gradients, congruent with ModelParams.
struct GradientVector {
  std::vector<Tensor> layers;

  std::size_t size() const { return layers.size(); }
  std::size_t NumElements() const;
  GradientVector Detached() const;
};

// Hard labels or per-sample class distributions ([batch, classes]).
struct Labels {
  std::vector<int> hard;
  std::optional<Tensor> soft;

  static Labels Hard(std::vector<int> labels) { return {std::move(labels), {}}; }
  static Labels Single(int label) { return {{label}, {}}; }
  static Labels Soft(Tensor probs) { return {{}, std::move(probs)}; }
};

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  // Kaiming-uniform weights (bound sqrt(6 / fan_in)) and uniform biases
  // (bound 1 / sqrt(fan_in)), drawn from config().seed.
  ModelParams Init() const;
  ModelParams Init(std::uint64_t seed) const;

  // x is [C, H, W] or [N, C, H, W]; returns logits [N, classes]. Tracked
  // params or inputs produce tracked logits.
  Tensor Forward(std::span<const Tensor> params, const Tensor& x) const;
  Tensor Forward(const ModelParams& params, const Tensor& x) const;

  Tensor Loss(std::span<const Tensor> params, const Tensor& x,
              const Labels& labels) const;

  // Gradient of the mean cross-entropy loss with respect to every parameter.
  // The parameters are registered as leaves of `graph`; x may be tracked in
  // the same graph. With create_graph the result stays differentiable.
  GradientVector LossGradients(Graph& graph, const ModelParams& params,
                               const Tensor& x, const Labels& labels,
                               bool create_graph = true) const;
  // Untracked convenience form.
  GradientVector LossGradients(const ModelParams& params, const Tensor& x,
                               const Labels& labels) const;

  // Fraction of samples whose argmax logit equals the label.
  double Accuracy(const ModelParams& params, const Tensor& x,
                  std::span<const int> labels) const;

 private:
  Tensor Batched(const Tensor& x) const;
  Tensor Act(const Tensor& x) const;

  ModelConfig config_;
};

// Joins all layers into one rank-1 tensor, in ModelParams order.
Tensor FlattenGrads(const GradientVector& g);
GradientVector UnflattenGrads(const Tensor& flat, const GradientVector& like);

}  // namespace ats

#endif  // ATS_NN_H_
