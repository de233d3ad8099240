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

#include "ats/experiment.h"

#include <algorithm>
#include <numeric>

#include "ats/io.h"
#include "ats/metrics.h"
#include "fmt/format.h"

namespace ats {

ExperimentData LoadExperimentData(const ExperimentConfig& cfg) {
  ExperimentData out;
  if (cfg.data.synthetic) {
    out.train = SynthDataset(*cfg.data.synthetic);
    SynthSpec eval = *cfg.data.synthetic;
    eval.samples_per_class = cfg.data.eval_samples_per_class;
    eval.seed = DeriveSeed(cfg.data.synthetic->seed, {0xE7A1});
    out.eval = SynthDataset(eval);
  } else {
    out.train = LoadImageFolder(cfg.data.train_path);
    if (!cfg.data.eval_path.empty()) out.eval = LoadImageFolder(cfg.data.eval_path);
  }
  const Shape expected = cfg.model.input.AsShape();
  if (out.train.images.front().shape() != expected) {
    throw Error(fmt::format("data: images are {}, the model expects {}",
                            out.train.images.front().shape().ToString(), expected.ToString()));
  }
  return out;
}

std::vector<std::size_t> TargetIndices(const Dataset& data, std::size_t count,
                                       std::uint64_t seed) {
  if (count > data.size()) {
    throw Error(fmt::format("targets: {} requested from {} samples", count, data.size()));
  }
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(DeriveSeed(seed, {0x7A6}));
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.Index(idx.size() - i)]);
  idx.resize(count);
  return idx;
}

AttackTrial RunAttackTrial(const Model& model, const ModelParams& params, const Dataset& data,
                           std::size_t index, const PolicySet* policies,
                           const std::optional<DefenseSpec>& defense, AttackConfig attack,
                           std::uint64_t seed) {
  if (index >= data.size()) throw Error(fmt::format("attack: sample {} out of range", index));
  AttackTrial t;
  t.index = index;
  t.label = data.labels[index];
  t.original = data.images[index];
  t.transformed = policies && policies->size() > 0
                      ? HybridApply(*policies, t.original, DeriveSeed(seed, {0x7F}))
                      : t.original;
  const Tensor batch = Reshape(t.transformed, Shape{1, t.transformed.shape()[0],
                                                    t.transformed.shape()[1],
                                                    t.transformed.shape()[2]});
  GradientVector shared = model.LossGradients(params, batch, Labels::Single(t.label));
  if (defense) {
    DefenseSpec spec = *defense;
    spec.seed = DeriveSeed(seed, {0xDF, defense->seed});
    shared = ApplyDefense(shared, spec);
  }
  attack.seed = DeriveSeed(seed, {0xA7});
  // Without an explicit start image, from_image starts at the target itself.
  if (attack.init == InitKind::kFromImage && !attack.init_image) attack.init_image = t.transformed;
  AttackTarget target{std::move(shared), t.label, t.transformed};
  if (attack.label_mode == LabelMode::kOptimizeSoft) target.label.reset();
  t.result = Reconstruct(model, params, target, attack);
  t.psnr = Psnr(t.result.reconstruction, t.transformed);
  return t;
}

SearchModels MakeSearchModels(const ExperimentConfig& cfg, const Model& model,
                              const Dataset& train) {
  const std::uint64_t seed = cfg.search.seed;
  return {SemiTrain(model, model.Init(DeriveSeed(seed, {0x3E})), train, cfg.semi_train,
                    DeriveSeed(seed, {0x3F})),
          model.Init(DeriveSeed(seed, {0x4E}))};
}

Tensor SideBySide(std::span<const Tensor> images) {
  if (images.empty()) throw Error("side by side: no images");
  const std::size_t h = images[0].shape()[1];
  std::size_t c = 1, w = 0;
  for (const Tensor& img : images) {
    if (img.shape().rank() != 3 || img.shape()[1] != h) {
      throw Error("side by side: images must be [C, H, W] with equal heights");
    }
    c = std::max(c, img.shape()[0]);
    w += img.shape()[2];
  }
  w += images.size() - 1;
  std::vector<double> out(c * h * w, 1.0);
  std::size_t x0 = 0;
  for (const Tensor& img : images) {
    const std::size_t ic = img.shape()[0], iw = img.shape()[2];
    const auto v = img.values();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < iw; ++x)
          out[(ch * h + y) * w + x0 + x] = v[((ic == 1 ? 0 : ch) * h + y) * iw + x];
    x0 += iw + 1;
  }
  return Tensor(Shape{c, h, w}, std::move(out));
}

}  // namespace ats
