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

#ifndef ATS_HYBRID_H_
#define ATS_HYBRID_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ats/tensor.h"
#include "ats/transforms.h"

namespace ats {

struct ScoredPolicy {
  Policy policy;
  double s_acc = 0.0;
  double s_pri = 0.0;
  std::size_t draw = 0;  // index of the draw that produced it, if searched
};

// When two policies count as sharing a transformation function.
enum class HybridStrictness {
  kOpName,       // any common operation name
  kOpMagnitude,  // any common (operation, magnitude) pair
};

std::string_view HybridStrictnessName(HybridStrictness s);
std::optional<HybridStrictness> ParseHybridStrictness(std::string_view name);

inline constexpr std::size_t kDefaultHybridSize = 2;

struct PolicySet {
  std::vector<ScoredPolicy> policies;
  // Members chosen by AssembleHybrid; HybridApply draws only among these
  // (or among all members when none is flagged).
  std::vector<bool> hybrid_eligible;

  std::size_t size() const { return policies.size(); }
  static PolicySet Of(std::vector<Policy> policies);
  std::vector<std::size_t> HybridMembers() const;
};

bool ShareFunctions(const Policy& a, const Policy& b, HybridStrictness strictness);

// Greedy scan over `candidates` (ascending S_pri) keeping a policy only when
// it shares no function with the policies already kept; stops after m.
PolicySet AssembleHybrid(const std::vector<ScoredPolicy>& candidates, std::size_t m,
                         HybridStrictness strictness = HybridStrictness::kOpMagnitude);

// Index of the member HybridApply picks for `seed`.
std::size_t HybridChoice(const PolicySet& set, std::uint64_t seed);
// Seed HybridApply passes to ApplyPolicy.
std::uint64_t HybridPolicySeed(std::uint64_t seed);
// Uniform choice among the hybrid members, then ApplyPolicy.
Tensor HybridApply(const PolicySet& set, const Tensor& image, std::uint64_t seed);

}  // namespace ats

#endif  // ATS_HYBRID_H_
