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

#ifndef ATS_CONFIG_H_
#define ATS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ats/attack.h"
#include "ats/dataset.h"
#include "ats/defense.h"
#include "ats/fedsim.h"
#include "ats/nn.h"
#include "ats/search.h"

namespace ats {

// Training and evaluation data: either image folders or the synthetic
// generator (the eval split then uses a derived seed).
struct DataConfig {
  std::optional<SynthSpec> synthetic;
  // Fixes the synthetic training set independently of the root seed.
  std::optional<std::uint64_t> seed;
  std::size_t eval_samples_per_class = 20;
  std::string train_path;
  std::string eval_path;
};

// Every seed below is derived from `seed` unless a section sets its own.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "reports";
  ModelConfig model = ModelConfig::ConvNet(ImageShape{1, 8, 8}, 10, 0);
  DataConfig data;
  AttackConfig attack;
  std::size_t attack_targets = 10;
  SearchConfig search;
  SemiTrainOptions semi_train;
  TrainConfig train;
  std::optional<DefenseSpec> defense;
};

// Structured JSON with sections model, data, attack, search, train and
// defense. Unknown keys are rejected at every level; "seed" is mandatory.
ExperimentConfig ParseConfig(std::string_view json_text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Canonical JSON that parses back to the same configuration.
std::string ConfigToJson(const ExperimentConfig& cfg);

// Sets the root seed and re-derives the section seeds.
void ApplySeed(ExperimentConfig& cfg, std::uint64_t seed);

// output_dir, or the ATS_REPORT_ROOT environment variable when set.
std::filesystem::path ReportRoot(const ExperimentConfig& cfg);

std::string_view ArchitectureName(Architecture a);
std::optional<Architecture> ParseArchitecture(std::string_view name);

}  // namespace ats

#endif  // ATS_CONFIG_H_
