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

#include "ats/fedsim.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ats/attack.h"
#include "ats/random.h"
#include "fmt/format.h"

namespace ats {
namespace {

double Norm(const GradientVector& g) {
  double s = 0.0;
  for (const Tensor& l : g.layers)
    for (double v : l.values()) s += v * v;
  return std::sqrt(s);
}

}  // namespace

void TrainConfig::Validate() const {
  if (participants == 0) throw Error("train: participants must be at least 1");
  if (batch_size == 0) throw Error("train: batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw Error("train: learning rate must be positive");
  if (sgd.momentum < 0.0 || sgd.weight_decay < 0.0) {
    throw Error("train: momentum and weight decay must be non-negative");
  }
  if (defense) defense->Validate();
  if (policies && policies->size() == 0) throw Error("train: empty policy set");
}

double ScheduledLearningRate(const TrainConfig& cfg, std::size_t iteration,
                             std::size_t total) {
  return cfg.learning_rate * (cfg.lr_decay ? StepDecay(iteration, total) : 1.0);
}

std::vector<Dataset> ShardDataset(const Dataset& data, std::size_t participants,
                                  std::uint64_t seed) {
  if (participants == 0) throw Error("shard: participants must be at least 1");
  if (data.size() < participants) {
    throw Error(fmt::format("shard: {} samples cannot serve {} participants",
                            data.size(), participants));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, {0x5AAD}));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Index(i)]);
  const std::size_t each = data.size() / participants;
  std::vector<Dataset> shards;
  for (std::size_t p = 0; p < participants; ++p) {
    shards.push_back(data.Subset(std::span(order).subspan(p * each, each)));
  }
  return shards;
}

void Adversary::Arm(std::size_t round, std::size_t participant) {
  slots_[{round, participant}];
}

bool Adversary::Armed(std::size_t round, std::size_t participant) const {
  return slots_.contains({round, participant});
}

void Adversary::Record(std::size_t round, std::size_t participant,
                       CapturedUpdate update) {
  auto it = slots_.find({round, participant});
  if (it == slots_.end()) return;
  it->second = std::move(update);
}

const CapturedUpdate& Adversary::Capture(std::size_t round,
                                         std::size_t participant) const {
  auto it = slots_.find({round, participant});
  if (it == slots_.end()) {
    throw Error(fmt::format("adversary: hook not armed for round {} participant {}",
                            round, participant));
  }
  if (!it->second) {
    throw Error(fmt::format("adversary: round {} participant {} has not run", round,
                            participant));
  }
  return *it->second;
}

std::vector<std::size_t> RoundBatch(const Dataset& shard, const TrainConfig& cfg,
                                    std::size_t round, std::size_t participant) {
  if (shard.size() == 0) throw Error("train: empty shard");
  Rng rng(DeriveSeed(cfg.seed, {0xF0, round, participant}));
  std::vector<std::size_t> idx(shard.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(cfg.batch_size, shard.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(idx[i], idx[i + rng.Index(shard.size() - i)]);
  }
  idx.resize(take);
  return idx;
}

RoundLog RunRound(const Model& model, ModelParams& params, SgdState& state,
                  const std::vector<Dataset>& shards, const TrainConfig& cfg,
                  std::size_t round, double lr, Adversary* adversary) {
  cfg.Validate();
  if (shards.size() != cfg.participants) {
    throw Error(fmt::format("train: {} shards for {} participants", shards.size(),
                            cfg.participants));
  }
  RoundLog log;
  log.round = round;
  log.learning_rate = lr;
  GradientVector mean;
  for (std::size_t p = 0; p < shards.size(); ++p) {
    const std::vector<std::size_t> idx = RoundBatch(shards[p], cfg, round, p);
    Dataset batch = shards[p].Subset(idx);
    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    const Tensor originals = batch.Batch(all);
    if (cfg.policies) {
      for (std::size_t i = 0; i < batch.size(); ++i) {
        batch.images[i] = HybridApply(*cfg.policies, batch.images[i],
                                      DeriveSeed(cfg.seed, {0xF1, round, p, i}));
      }
    }
    const Tensor inputs = batch.Batch(all);
    GradientVector g;
    try {
      g = model.LossGradients(params, inputs, Labels::Hard(batch.labels));
      log.train_loss +=
          model.Loss(params.Tensors(), inputs, Labels::Hard(batch.labels)).item();
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("train: round {} participant {} aborted: {}",
                                       round, p, e.what()));
    }
    if (cfg.defense) {
      DefenseSpec spec = *cfg.defense;
      spec.seed = DeriveSeed(cfg.defense->seed, {cfg.seed, round, p});
      g = ApplyDefense(g, spec);
    }
    log.participant_grad_norms.push_back(Norm(g));
    if (adversary && adversary->Armed(round, p)) {
      adversary->Record(round, p, {g, inputs, originals, batch.labels});
    }
    // Running mean: identical inputs average to themselves exactly.
    if (p == 0) {
      mean = g;
    } else {
      const double w = 1.0 / static_cast<double>(p + 1);
      for (std::size_t l = 0; l < mean.size(); ++l) {
        mean.layers[l] = Add(mean.layers[l], Scale(Sub(g.layers[l], mean.layers[l]), w));
      }
    }
  }
  log.train_loss /= static_cast<double>(shards.size());
  log.update_norm = Norm(mean);
  params = SgdUpdate(params, mean, state, lr, cfg.sgd);
  return log;
}

double EvalAccuracy(const Model& model, const ModelParams& params, const Dataset& eval) {
  if (eval.size() == 0) return 0.0;
  std::vector<std::size_t> all(eval.size());
  std::iota(all.begin(), all.end(), 0);
  return model.Accuracy(params, eval.Batch(all), eval.labels);
}

TrainingResult RunTraining(const Model& model, const ModelParams& init,
                           const TrainConfig& cfg, const Dataset& train,
                           const Dataset& eval, Adversary* adversary) {
  cfg.Validate();
  const std::vector<Dataset> shards = ShardDataset(train, cfg.participants, cfg.seed);
  TrainingResult result;
  result.params = init;
  result.rounds_per_epoch = (shards[0].size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total = cfg.epochs * result.rounds_per_epoch;
  result.accuracy.push_back(EvalAccuracy(model, result.params, eval));
  SgdState state;
  std::size_t t = 0;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    for (std::size_t r = 0; r < result.rounds_per_epoch; ++r, ++t) {
      result.rounds.push_back(RunRound(model, result.params, state, shards, cfg, t,
                                       ScheduledLearningRate(cfg, t, total), adversary));
    }
    result.accuracy.push_back(EvalAccuracy(model, result.params, eval));
  }
  return result;
}

}  // namespace ats
