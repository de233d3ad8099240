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

#ifndef ATS_SEARCH_H_
#define ATS_SEARCH_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ats/dataset.h"
#include "ats/fedsim.h"
#include "ats/hybrid.h"
#include "ats/nn.h"
#include "ats/random.h"
#include "ats/scores.h"
#include "ats/transforms.h"

namespace ats {

struct SemiTrainOptions {
  double fraction = 0.1;
  std::size_t epochs = 50;
  // participants is forced to 1; policies and defense are ignored.
  TrainConfig train;
};

// Trains `init` on a seeded `fraction` subset of `data` with the
// single-node trainer.
ModelParams SemiTrain(const Model& model, const ModelParams& init, const Dataset& data,
                      const SemiTrainOptions& options, std::uint64_t seed);

// Length uniform in 1..k, then that many table indices, uniform with
// replacement.
Policy SamplePolicy(Rng& rng, std::size_t k, const PolicyTable& table);

struct SearchConfig {
  std::size_t c_max = 1500;
  std::size_t n = 5;
  std::size_t k = kDefaultMaxPolicyLength;
  double t_acc = -std::numeric_limits<double>::infinity();
  // Samples drawn from the dataset for the privacy score.
  std::size_t privacy_samples = 100;
  PrivacyScoreOptions privacy;
  AccuracyScoreOptions accuracy;
  std::size_t hybrid_size = kDefaultHybridSize;
  HybridStrictness strictness = HybridStrictness::kOpMagnitude;
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SearchRecord {
  std::size_t draw = 0;
  Policy policy;
  double s_acc = 0.0;
  std::optional<double> s_pri;  // absent when filtered out
  bool accepted = false;        // s_acc >= t_acc
};

struct SearchResult {
  // The n distinct accepted policies with the smallest S_pri, ascending;
  // hybrid_eligible marks the members assembled into the hybrid.
  PolicySet policies;
  std::vector<SearchRecord> records;  // draw order
  std::size_t draws = 0;
  std::size_t accuracy_evaluations = 0;
  std::size_t privacy_evaluations = 0;
};

// Scores used by the search for one policy, with the search's seeds.
double SearchAccuracyScore(const Model& model, const ModelParams& m_r, const Policy& policy,
                           const Dataset& data, const SearchConfig& cfg);
double SearchPrivacyScore(const Model& model, const ModelParams& m_s, const Policy& policy,
                          const Dataset& data, const SearchConfig& cfg);

// The samples and curves behind SearchPrivacyScore.
Dataset SearchPrivacySamples(const Dataset& data, const SearchConfig& cfg);
std::vector<std::optional<std::vector<GradSimPoint>>> SearchPrivacyCurves(
    const Model& model, const ModelParams& m_s, const Policy& policy, const Dataset& data,
    const SearchConfig& cfg);

// Random search: every draw is scored for accuracy first and only accepted
// draws are scored for privacy. Drawing continues past c_max until n
// distinct policies are accepted, up to 10 * c_max draws.
SearchResult Search(const SearchConfig& cfg, const Model& model, const ModelParams& m_s,
                    const ModelParams& m_r, const Dataset& data,
                    const PolicyTable& table = PolicyTable::Default());

// "draw,policy,s_acc,s_pri,accepted" rows.
std::string SearchReportCsv(const SearchResult& result);

}  // namespace ats

#endif  // ATS_SEARCH_H_
