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

#include "ats/nn.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ats/random.h"
#include "fmt/format.h"

namespace ats {
namespace {

struct LayerShape {
  std::string name;
  Shape weight;
  std::size_t fan_in;
  std::size_t bias;
};

std::vector<LayerShape> Layout(const ModelConfig& c) {
  std::vector<LayerShape> layers;
  const std::size_t h = c.input.height, w = c.input.width;
  switch (c.architecture) {
    case Architecture::kMlp: {
      std::size_t in = c.input.numel();
      std::size_t idx = 1;
      for (std::size_t width : c.widths) {
        layers.push_back({fmt::format("fc{}", idx++), Shape{in, width}, in, width});
        in = width;
      }
      layers.push_back({fmt::format("fc{}", idx), Shape{in, c.classes}, in,
                        c.classes});
      break;
    }
    case Architecture::kConvNet: {
      std::size_t in = c.input.channels;
      std::size_t idx = 1;
      for (std::size_t ch : c.channels) {
        layers.push_back({fmt::format("conv{}", idx++), Shape{ch, in, 3, 3},
                          in * 9, ch});
        in = ch;
      }
      const bool pool = h % 2 == 0 && w % 2 == 0;
      std::size_t features = in * (pool ? (h / 2) * (w / 2) : h * w);
      idx = 1;
      if (c.fc_width > 0) {
        layers.push_back({fmt::format("fc{}", idx++), Shape{features, c.fc_width},
                          features, c.fc_width});
        features = c.fc_width;
      }
      layers.push_back({fmt::format("fc{}", idx), Shape{features, c.classes},
                        features, c.classes});
      break;
    }
    case Architecture::kSmallResNet: {
      const std::size_t width = c.channels.empty() ? 8 : c.channels[0];
      layers.push_back({"stem", Shape{width, c.input.channels, 3, 3},
                        c.input.channels * 9, width});
      for (std::size_t b = 1; b <= c.blocks; ++b) {
        for (std::size_t k = 1; k <= 2; ++k) {
          layers.push_back({fmt::format("block{}.conv{}", b, k),
                            Shape{width, width, 3, 3}, width * 9, width});
        }
      }
      const std::size_t features = width * (h / 2) * (w / 2);
      layers.push_back({"fc", Shape{features, c.classes}, features, c.classes});
      break;
    }
  }
  return layers;
}

Tensor Linear(const Tensor& h, const Tensor& w, const Tensor& b) {
  const std::size_t batch = h.shape()[0], out = w.shape()[1];
  return Add(MatMul(h, w), Expand(b, batch, 1, Shape{batch, out}));
}

Tensor Conv3x3(const Tensor& h, const Tensor& w, const Tensor& b) {
  Tensor y = Conv2d(h, w, 1);
  const Shape& s = y.shape();
  return Add(y, Expand(b, s[0], s[2] * s[3], s));
}

}  // namespace

void ModelConfig::Validate() const {
  if (classes < 2) throw Error("model config: class count must be >= 2");
  if (input.channels == 0 || input.height == 0 || input.width == 0) {
    throw Error("model config: input extents must be positive");
  }
  for (std::size_t v : widths) {
    if (v == 0) throw Error("model config: mlp widths must be positive");
  }
  for (std::size_t v : channels) {
    if (v == 0) throw Error("model config: channel counts must be positive");
  }
  if (architecture == Architecture::kConvNet && channels.empty()) {
    throw Error("model config: convnet needs at least one conv layer");
  }
  if (architecture == Architecture::kSmallResNet) {
    if (blocks == 0) throw Error("model config: smallresnet needs blocks >= 1");
    if (input.height % 2 != 0 || input.width % 2 != 0) {
      throw Error("model config: smallresnet needs even input extents");
    }
  }
}

ModelConfig ModelConfig::Mlp(std::vector<std::size_t> widths, ImageShape input,
                             std::size_t classes, std::uint64_t seed) {
  ModelConfig c;
  c.architecture = Architecture::kMlp;
  c.widths = std::move(widths);
  c.input = input;
  c.classes = classes;
  c.seed = seed;
  return c;
}

ModelConfig ModelConfig::ConvNet(ImageShape input, std::size_t classes,
                                 std::uint64_t seed) {
  ModelConfig c;
  c.architecture = Architecture::kConvNet;
  c.channels = {8, 16};
  c.input = input;
  c.classes = classes;
  c.seed = seed;
  return c;
}

ModelConfig ModelConfig::SmallResNet(std::size_t blocks, ImageShape input,
                                     std::size_t classes, std::uint64_t seed) {
  ModelConfig c;
  c.architecture = Architecture::kSmallResNet;
  c.channels = {8};
  c.blocks = blocks;
  c.input = input;
  c.classes = classes;
  c.seed = seed;
  return c;
}

std::vector<Tensor> ModelParams::Tensors() const {
  std::vector<Tensor> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.value);
  return out;
}

std::size_t ModelParams::NumParameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.value.numel();
  return n;
}

ModelParams ModelParams::FromTensors(const ModelParams& like,
                                     std::vector<Tensor> values) {
  if (values.size() != like.layers.size()) {
    throw Error(fmt::format("expected {} parameter tensors, got {}",
                            like.layers.size(), values.size()));
  }
  ModelParams p;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != like.layers[i].value.shape()) {
      throw Error(fmt::format("parameter {}: shape mismatch {} vs {}",
                              like.layers[i].name,
                              values[i].shape().ToString(),
                              like.layers[i].value.shape().ToString()));
    }
    p.layers.push_back({like.layers[i].name, values[i].Detach()});
  }
  return p;
}

std::size_t GradientVector::NumElements() const {
  std::size_t n = 0;
  for (const auto& t : layers) n += t.numel();
  return n;
}

GradientVector GradientVector::Detached() const {
  GradientVector g;
  for (const auto& t : layers) g.layers.push_back(t.Detach());
  return g;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.Validate();
}

ModelParams Model::Init() const { return Init(config_.seed); }

ModelParams Model::Init(std::uint64_t seed) const {
  Rng rng(DeriveSeed(seed, {0x1417}));
  ModelParams p;
  for (const LayerShape& l : Layout(config_)) {
    const double wb = std::sqrt(6.0 / static_cast<double>(l.fan_in));
    const double bb = 1.0 / std::sqrt(static_cast<double>(l.fan_in));
    std::vector<double> w(l.weight.numel()), b(l.bias);
    for (double& v : w) v = rng.Uniform(-wb, wb);
    for (double& v : b) v = rng.Uniform(-bb, bb);
    p.layers.push_back({l.name + ".weight", Tensor(l.weight, std::move(w))});
    p.layers.push_back({l.name + ".bias", Tensor(Shape{l.bias}, std::move(b))});
  }
  return p;
}

Tensor Model::Batched(const Tensor& x) const {
  const Shape& s = x.shape();
  const ImageShape& in = config_.input;
  if (s.rank() == 3 && s == in.AsShape()) {
    return Reshape(x, Shape{1, in.channels, in.height, in.width});
  }
  if (s.rank() == 4 && s[1] == in.channels && s[2] == in.height &&
      s[3] == in.width) {
    return x;
  }
  throw Error(fmt::format("model input {} does not match configured {}",
                          s.ToString(), in.AsShape().ToString()));
}

Tensor Model::Act(const Tensor& x) const {
  return config_.activation == Activation::kRelu ? Relu(x) : Sigmoid(x);
}

Tensor Model::Forward(std::span<const Tensor> p, const Tensor& x) const {
  const std::size_t expected = 2 * Layout(config_).size();
  if (p.size() != expected) {
    throw Error(fmt::format("model expects {} parameter tensors, got {}",
                            expected, p.size()));
  }
  Tensor h = Batched(x);
  const std::size_t batch = h.shape()[0];
  std::size_t i = 0;
  switch (config_.architecture) {
    case Architecture::kMlp: {
      h = Reshape(h, Shape{batch, config_.input.numel()});
      for (std::size_t l = 0; l < config_.widths.size(); ++l, i += 2) {
        h = Act(Linear(h, p[i], p[i + 1]));
      }
      return Linear(h, p[i], p[i + 1]);
    }
    case Architecture::kConvNet: {
      for (std::size_t l = 0; l < config_.channels.size(); ++l, i += 2) {
        h = Act(Conv3x3(h, p[i], p[i + 1]));
      }
      if (h.shape()[2] % 2 == 0 && h.shape()[3] % 2 == 0) h = AvgPool2x2(h);
      h = Flatten(h);
      if (config_.fc_width > 0) {
        h = Act(Linear(h, p[i], p[i + 1]));
        i += 2;
      }
      return Linear(h, p[i], p[i + 1]);
    }
    case Architecture::kSmallResNet: {
      h = Act(Conv3x3(h, p[0], p[1]));
      i = 2;
      for (std::size_t b = 0; b < config_.blocks; ++b, i += 4) {
        Tensor r = Act(Conv3x3(h, p[i], p[i + 1]));
        r = Conv3x3(r, p[i + 2], p[i + 3]);
        h = Act(Add(h, r));
      }
      h = Flatten(AvgPool2x2(h));
      return Linear(h, p[i], p[i + 1]);
    }
  }
  throw Error("unknown architecture");
}

Tensor Model::Forward(const ModelParams& params, const Tensor& x) const {
  return Forward(params.Tensors(), x);
}

Tensor Model::Loss(std::span<const Tensor> params, const Tensor& x,
                   const Labels& labels) const {
  Tensor logits = Forward(params, x);
  if (labels.soft) return SoftCrossEntropy(logits, *labels.soft);
  return CrossEntropy(logits, labels.hard);
}

GradientVector Model::LossGradients(Graph& graph, const ModelParams& params,
                                    const Tensor& x, const Labels& labels,
                                    bool create_graph) const {
  std::vector<Tensor> leaves;
  leaves.reserve(params.size());
  for (const auto& l : params.layers) leaves.push_back(graph.Variable(l.value.Detach()));
  Tensor loss = Loss(leaves, x, labels);
  GradientVector g;
  g.layers = Backward(loss, leaves, create_graph);
  return g;
}

GradientVector Model::LossGradients(const ModelParams& params, const Tensor& x,
                                    const Labels& labels) const {
  Graph graph;
  return LossGradients(graph, params, x.Detach(), labels, false).Detached();
}

double Model::Accuracy(const ModelParams& params, const Tensor& x,
                       std::span<const int> labels) const {
  Tensor logits = Forward(params, x.Detach());
  const std::size_t batch = logits.shape()[0], classes = logits.shape()[1];
  if (batch != labels.size()) {
    throw Error(fmt::format("accuracy: {} samples vs {} labels", batch,
                            labels.size()));
  }
  auto v = logits.values();
  std::size_t correct = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    auto row = v.subspan(b * classes, classes);
    const auto best = static_cast<int>(
        std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch);
}

Tensor FlattenGrads(const GradientVector& g) {
  if (g.layers.empty()) throw Error("flatten_grads: empty gradient");
  return Concat(g.layers);
}

GradientVector UnflattenGrads(const Tensor& flat, const GradientVector& like) {
  if (flat.numel() != like.NumElements()) {
    throw Error(fmt::format("unflatten_grads: {} values for {} slots",
                            flat.numel(), like.NumElements()));
  }
  GradientVector g;
  std::size_t offset = 0;
  for (const Tensor& t : like.layers) {
    g.layers.push_back(Reshape(Slice(flat, offset, t.numel()), t.shape()));
    offset += t.numel();
  }
  return g;
}

}  // namespace ats
