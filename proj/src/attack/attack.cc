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

#include "ats/attack.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "ats/metrics.h"
#include "ats/random.h"
#include "fmt/format.h"
#include "spdlog/spdlog.h"

namespace ats {
namespace {

constexpr std::array<std::string_view, 3> kDistanceNames = {"l2", "l1", "cosine"};
constexpr std::array<std::string_view, 3> kOptimizerNames = {"adam", "sgd", "lbfgs"};
constexpr std::array<std::string_view, 3> kInitNames = {"gaussian", "black",
                                                        "from_image"};

template <typename E, std::size_t N>
std::optional<E> ParseName(const std::array<std::string_view, N>& names,
                           std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

struct Evaluation {
  double objective;
  double distance;
  GradientVector dummy_gradient;
};

// Objective of the attack at the flat point `z` = [pixels, label logits].
class AttackObjective {
 public:
  AttackObjective(const Model& model, const ModelParams& params,
                  const AttackTarget& target, const AttackConfig& cfg)
      : model_(model), params_(params), target_(target), cfg_(cfg),
        shape_(model.config().input.AsShape()),
        pixels_(shape_.numel()),
        classes_(model.config().classes) {}

  std::size_t size() const {
    return pixels_ + (cfg_.label_mode == LabelMode::kOptimizeSoft ? classes_ : 0);
  }
  std::size_t pixels() const { return pixels_; }
  std::size_t classes() const { return classes_; }
  const Shape& shape() const { return shape_; }

  Evaluation Evaluate(std::span<const double> z, std::span<double> grad) const {
    Graph graph;
    const Tensor x = graph.Variable(
        Tensor(shape_, std::vector<double>(z.begin(), z.begin() + pixels_)));
    std::vector<Tensor> wrt = {x};
    Labels labels;
    if (cfg_.label_mode == LabelMode::kOptimizeSoft) {
      const Tensor logits = graph.Variable(Tensor(
          Shape{1, classes_}, std::vector<double>(z.begin() + pixels_, z.end())));
      wrt.push_back(logits);
      labels = Labels::Soft(Softmax(logits));
    } else {
      labels = Labels::Single(*target_.label);
    }
    GradientVector dummy =
        model_.LossGradients(graph, params_, x, labels, /*create_graph=*/true);
    const Tensor distance = GradientDistance(dummy, target_.gradient, cfg_.distance);
    Tensor objective = distance;
    if (cfg_.tv_weight > 0.0) {
      objective = Add(objective, Scale(TotalVariation(x), cfg_.tv_weight));
    }
    const std::vector<Tensor> grads = Backward(objective, wrt, false);
    std::copy(grads[0].values().begin(), grads[0].values().end(), grad.begin());
    if (grads.size() > 1) {
      std::copy(grads[1].values().begin(), grads[1].values().end(),
                grad.begin() + pixels_);
    }
    return {objective.item(), distance.item(), dummy.Detached()};
  }

 private:
  const Model& model_;
  const ModelParams& params_;
  const AttackTarget& target_;
  const AttackConfig& cfg_;
  Shape shape_;
  std::size_t pixels_;
  std::size_t classes_;
};

struct RestartOutcome {
  std::vector<double> best_point;
  double objective = std::numeric_limits<double>::infinity();
  double distance = 0.0;
  std::vector<TracePoint> trace;
  LayerTrace layer_trace;
};

class RestartRunner {
 public:
  RestartRunner(const AttackObjective& objective, const AttackTarget& target,
                const AttackConfig& cfg, const ModelParams& params)
      : objective_(objective), target_(target), cfg_(cfg) {
    if (cfg.layer_trace_every > 0) {
      for (const auto& layer : params.layers) outcome_.layer_trace.layers.push_back(layer.name);
    }
  }

  RestartOutcome Run(std::size_t restart) {
    std::vector<double> z = Initial(restart);
    std::vector<double> grad(z.size());
    auto project = [this](std::span<double> p) {
      for (std::size_t i = 0; i < objective_.pixels(); ++i)
        p[i] = std::clamp(p[i], 0.0, 1.0);
    };

    if (cfg_.optimizer == OptimizerKind::kLbfgs) {
      Lbfgs lbfgs(z.size(), cfg_.lbfgs);
      // The last evaluation of a step is always at the accepted point.
      std::optional<Evaluation> last;
      Objective f = [&](std::span<const double> p, std::span<double> g) {
        last = objective_.Evaluate(p, g);
        return last->objective;
      };
      double value = f(z, grad);
      Record(0, z, *last);
      for (std::size_t t = 1; t < cfg_.iterations; ++t) {
        lbfgs.Step(z, value, grad, f, project);
        Record(t, z, *last);
      }
    } else {
      Adam adam(z.size(), cfg_.adam);
      Sgd sgd(z.size(), cfg_.sgd_momentum);
      for (std::size_t t = 0; t < cfg_.iterations; ++t) {
        Record(t, z, objective_.Evaluate(z, grad));
        if (t + 1 == cfg_.iterations) break;
        const double lr = cfg_.learning_rate *
                          (cfg_.lr_decay ? StepDecay(t, cfg_.iterations) : 1.0);
        if (cfg_.optimizer == OptimizerKind::kAdam) {
          adam.Step(z, grad, lr);
        } else {
          sgd.Step(z, grad, lr);
        }
        project(z);
      }
    }
    return std::move(outcome_);
  }

 private:
  std::vector<double> Initial(std::size_t restart) const {
    const std::uint64_t seed = DeriveSeed(cfg_.seed, {0xA77AC, restart});
    Tensor x;
    switch (cfg_.init) {
      case InitKind::kGaussian:
        x = GaussianStart(objective_.shape(), seed);
        break;
      case InitKind::kBlack:
        x = Tensor::Zeros(objective_.shape());
        break;
      case InitKind::kFromImage:
        x = *cfg_.init_image;
        break;
    }
    std::vector<double> z = x.ToVector();
    if (cfg_.label_mode == LabelMode::kOptimizeSoft) {
      Rng rng(DeriveSeed(seed, {1}));
      for (std::size_t c = 0; c < objective_.classes(); ++c) z.push_back(rng.Normal());
    }
    return z;
  }

  void Record(std::size_t t, const std::vector<double>& z, const Evaluation& e) {
    if (e.objective < outcome_.objective) {
      outcome_.objective = e.objective;
      outcome_.distance = e.distance;
      outcome_.best_point = z;
      if (target_.reference) {
        best_psnr_ = Psnr(Image(z), *target_.reference);
      }
    }
    outcome_.trace.push_back({t, e.objective, best_psnr_});
    if (cfg_.layer_trace_every > 0 && t % cfg_.layer_trace_every == 0) {
      outcome_.layer_trace.iterations.push_back(t);
      outcome_.layer_trace.similarity.push_back(
          LayerwiseSimilarity(e.dummy_gradient, target_.gradient));
    }
  }

  Tensor Image(std::span<const double> z) const {
    return Tensor(objective_.shape(),
                  std::vector<double>(z.begin(), z.begin() + objective_.pixels()));
  }

  const AttackObjective& objective_;
  const AttackTarget& target_;
  const AttackConfig& cfg_;
  RestartOutcome outcome_;
  std::optional<double> best_psnr_;
};

}  // namespace

std::string_view DistanceName(DistanceKind kind) {
  return kDistanceNames[static_cast<std::size_t>(kind)];
}
std::string_view OptimizerName(OptimizerKind kind) {
  return kOptimizerNames[static_cast<std::size_t>(kind)];
}
std::string_view InitName(InitKind kind) {
  return kInitNames[static_cast<std::size_t>(kind)];
}
std::optional<DistanceKind> ParseDistance(std::string_view name) {
  return ParseName<DistanceKind>(kDistanceNames, name);
}
std::optional<OptimizerKind> ParseOptimizer(std::string_view name) {
  return ParseName<OptimizerKind>(kOptimizerNames, name);
}
std::optional<InitKind> ParseInit(std::string_view name) {
  return ParseName<InitKind>(kInitNames, name);
}

Tensor GradientDistance(const GradientVector& a, const GradientVector& b,
                        DistanceKind kind) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("gradient distance: {} vs {} layers", a.size(),
                            b.size()));
  }
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a.layers[l].shape() != b.layers[l].shape()) {
      throw Error(fmt::format("gradient distance: layer {} shape {} vs {}", l,
                              a.layers[l].shape().ToString(),
                              b.layers[l].shape().ToString()));
    }
  }
  const Tensor fa = FlattenGrads(a);
  const Tensor fb = FlattenGrads(b);
  switch (kind) {
    case DistanceKind::kL2: {
      const Tensor d = Sub(fa, fb);
      return Dot(d, d);
    }
    case DistanceKind::kL1:
      return L1Norm(Sub(fa, fb));
    case DistanceKind::kCosine: {
      const double na = L2Norm(fa.Detach()).item();
      const double nb = L2Norm(fb.Detach()).item();
      if (na == 0.0) {
        throw NumericalError("cosine distance: first gradient has zero norm");
      }
      if (nb == 0.0) {
        throw NumericalError("cosine distance: second gradient has zero norm");
      }
      const Tensor cos = DivScalarTensor(Dot(fa, fb), Mul(L2Norm(fa), L2Norm(fb)));
      return AddScalar(Neg(cos), 1.0);
    }
  }
  throw Error("unknown distance");
}

Tensor TotalVariation(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.rank() != 3) {
    throw Error("total variation: expected [C, H, W], got " + s.ToString());
  }
  const std::size_t c = s[0], h = s[1], w = s[2];
  Tensor total = Tensor::Scalar(0.0);
  const Tensor flat = Flatten(x);
  // Horizontal and vertical neighbor differences as two shifted views.
  std::vector<Tensor> left, right, up, down;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t row = (ch * h + y) * w;
      if (w > 1) {
        left.push_back(Slice(flat, row, w - 1));
        right.push_back(Slice(flat, row + 1, w - 1));
      }
    }
    if (h > 1) {
      up.push_back(Slice(flat, ch * h * w, (h - 1) * w));
      down.push_back(Slice(flat, ch * h * w + w, (h - 1) * w));
    }
  }
  if (!left.empty()) total = Add(total, L1Norm(Sub(Concat(right), Concat(left))));
  if (!up.empty()) total = Add(total, L1Norm(Sub(Concat(down), Concat(up))));
  return total;
}

Tensor GaussianStart(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(shape.numel());
  for (double& p : v) p = std::clamp(rng.Normal(), 0.0, 1.0);
  return Tensor(shape, std::move(v));
}

AttackConfig AttackConfig::For(OptimizerKind optimizer, DistanceKind distance) {
  AttackConfig cfg;
  cfg.optimizer = optimizer;
  cfg.distance = distance;
  if (optimizer == OptimizerKind::kLbfgs) {
    cfg.iterations = 300;
    cfg.restarts = 16;
  }
  return cfg;
}

void AttackConfig::Validate() const {
  if (iterations == 0) throw Error("attack: iterations must be at least 1");
  if (restarts == 0) throw Error("attack: restarts must be at least 1");
  if (!(tv_weight >= 0.0)) throw Error("attack: tv_weight must be non-negative");
  if (!(learning_rate > 0.0)) throw Error("attack: learning rate must be positive");
  if (init == InitKind::kFromImage && !init_image) {
    throw Error("attack: from_image init needs an image");
  }
}

ObjectiveValue EvaluateAttackObjective(const Model& model,
                                       const ModelParams& params,
                                       const AttackTarget& target,
                                       const AttackConfig& cfg, const Tensor& x,
                                       const std::optional<Tensor>& logits) {
  const AttackObjective objective(model, params, target, cfg);
  if (x.shape() != objective.shape()) {
    throw Error("attack objective: image shape does not match the model input");
  }
  const bool soft = cfg.label_mode == LabelMode::kOptimizeSoft;
  if (soft != logits.has_value() ||
      (logits && logits->numel() != objective.classes())) {
    throw Error("attack objective: label logits do not match the label mode");
  }
  std::vector<double> z = x.ToVector();
  if (logits) z.insert(z.end(), logits->values().begin(), logits->values().end());
  std::vector<double> grad(z.size());
  const Evaluation e = objective.Evaluate(z, grad);
  ObjectiveValue out{e.objective, e.distance,
                     Tensor(x.shape(), std::vector<double>(
                                           grad.begin(), grad.begin() + x.numel())),
                     std::nullopt};
  if (logits) {
    out.grad_logits = Tensor(logits->shape(),
                             std::vector<double>(grad.begin() + x.numel(), grad.end()));
  }
  return out;
}

AttackResult Reconstruct(const Model& model, const ModelParams& params,
                         const AttackTarget& target, const AttackConfig& cfg) {
  cfg.Validate();
  const Shape shape = model.config().input.AsShape();
  if (cfg.init_image && cfg.init_image->shape() != shape) {
    throw Error(fmt::format("attack: init image shape {} does not match input {}",
                            cfg.init_image->shape().ToString(), shape.ToString()));
  }
  if (cfg.label_mode == LabelMode::kKnown && !target.label) {
    throw Error("attack: known-label mode needs a label");
  }
  if (cfg.label_mode == LabelMode::kOptimizeSoft && target.label) {
    throw Error("attack: soft-label mode takes no label");
  }
  if (target.label && (*target.label < 0 ||
                       static_cast<std::size_t>(*target.label) >= model.config().classes)) {
    throw Error(fmt::format("attack: label {} out of range", *target.label));
  }
  if (target.reference && target.reference->shape() != shape) {
    throw Error("attack: reference image shape does not match the model input");
  }

  const AttackObjective objective(model, params, target, cfg);
  AttackResult result;
  std::optional<RestartOutcome> best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RestartSummary summary;
    try {
      RestartOutcome outcome = RestartRunner(objective, target, cfg, params).Run(r);
      summary.objective = outcome.objective;
      if (!best || outcome.objective < best->objective) {
        best = std::move(outcome);
        result.best_restart = r;
      }
    } catch (const NumericalError& e) {
      summary.diverged = true;
      summary.objective = std::numeric_limits<double>::quiet_NaN();
      spdlog::warn("attack restart {} diverged: {}", r, e.what());
    }
    result.restarts.push_back(summary);
  }
  if (!best) throw NumericalError("attack: every restart diverged");

  const std::vector<double>& z = best->best_point;
  result.reconstruction =
      Tensor(shape, std::vector<double>(z.begin(), z.begin() + shape.numel()));
  if (cfg.label_mode == LabelMode::kOptimizeSoft) {
    result.soft_label = Softmax(Tensor(
        Shape{1, model.config().classes},
        std::vector<double>(z.begin() + shape.numel(), z.end())));
  }
  result.objective = best->objective;
  result.distance = best->distance;
  if (target.reference) result.psnr = Psnr(result.reconstruction, *target.reference);
  result.trace = std::move(best->trace);
  result.layer_trace = std::move(best->layer_trace);
  return result;
}

}  // namespace ats
