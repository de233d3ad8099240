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

#ifndef ATS_FEDSIM_H_
#define ATS_FEDSIM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ats/dataset.h"
#include "ats/defense.h"
#include "ats/hybrid.h"
#include "ats/nn.h"
#include "ats/sgd.h"

namespace ats {

struct TrainConfig {
  std::size_t participants = 10;
  std::size_t epochs = 1;
  std::size_t batch_size = 8;
  double learning_rate = 0.1;
  bool lr_decay = true;
  SgdOptions sgd;
  std::optional<DefenseSpec> defense;
  std::optional<PolicySet> policies;
  std::uint64_t seed = 0;

  void Validate() const;
};

// learning_rate * 0.1^(number of boundaries 3/8, 5/8, 7/8 of `total` passed).
double ScheduledLearningRate(const TrainConfig& cfg, std::size_t iteration,
                             std::size_t total);

// Seeded shuffle, then equal contiguous shards; the remainder is dropped.
std::vector<Dataset> ShardDataset(const Dataset& data, std::size_t participants,
                                  std::uint64_t seed);

// What a participant shared in one round, as seen by an adversary.
struct CapturedUpdate {
  GradientVector gradient;  // post-defense, pre-aggregation
  Tensor inputs;            // the batch the gradient was computed on
  Tensor originals;         // the same batch before any transformation
  std::vector<int> labels;
};

// Honest-but-curious observer: armed for (round, participant) pairs before
// training, it records exactly what those participants share.
class Adversary {
 public:
  void Arm(std::size_t round, std::size_t participant);
  bool Armed(std::size_t round, std::size_t participant) const;
  void Record(std::size_t round, std::size_t participant, CapturedUpdate update);
  // Throws when the pair was never armed or its round has not run.
  const CapturedUpdate& Capture(std::size_t round, std::size_t participant) const;

 private:
  std::map<std::pair<std::size_t, std::size_t>, std::optional<CapturedUpdate>> slots_;
};

struct RoundLog {
  std::size_t round = 0;
  double learning_rate = 0.0;
  std::vector<double> participant_grad_norms;
  double update_norm = 0.0;
  double train_loss = 0.0;  // mean over participants
};

// One synchronous round: every participant samples a batch from its shard,
// (optionally) transforms it, computes and (optionally) defends its
// gradient; the server averages and applies an SGD step.
RoundLog RunRound(const Model& model, ModelParams& params, SgdState& state,
                  const std::vector<Dataset>& shards, const TrainConfig& cfg,
                  std::size_t round, double lr, Adversary* adversary = nullptr);

// Indices participant `p` trains on in `round`.
std::vector<std::size_t> RoundBatch(const Dataset& shard, const TrainConfig& cfg,
                                    std::size_t round, std::size_t participant);

struct TrainingResult {
  ModelParams params;
  // Eval accuracy of the initial model, then after every epoch.
  std::vector<double> accuracy;
  std::vector<RoundLog> rounds;
  std::size_t rounds_per_epoch = 0;
};

TrainingResult RunTraining(const Model& model, const ModelParams& init,
                           const TrainConfig& cfg, const Dataset& train,
                           const Dataset& eval, Adversary* adversary = nullptr);

double EvalAccuracy(const Model& model, const ModelParams& params, const Dataset& eval);

}  // namespace ats

#endif  // ATS_FEDSIM_H_
