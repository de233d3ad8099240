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

#include "ats/hybrid.h"

#include <algorithm>

#include "ats/random.h"
#include "spdlog/spdlog.h"

namespace ats {

std::string_view HybridStrictnessName(HybridStrictness s) {
  return s == HybridStrictness::kOpName ? "op-name" : "op+magnitude";
}

std::optional<HybridStrictness> ParseHybridStrictness(std::string_view name) {
  if (name == "op-name") return HybridStrictness::kOpName;
  if (name == "op+magnitude") return HybridStrictness::kOpMagnitude;
  return std::nullopt;
}

PolicySet PolicySet::Of(std::vector<Policy> policies) {
  PolicySet set;
  for (auto& p : policies) set.policies.push_back({std::move(p), 0.0, 0.0, 0});
  set.hybrid_eligible.assign(set.policies.size(), true);
  return set;
}

std::vector<std::size_t> PolicySet::HybridMembers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (i < hybrid_eligible.size() && hybrid_eligible[i]) out.push_back(i);
  }
  if (out.empty()) {
    for (std::size_t i = 0; i < policies.size(); ++i) out.push_back(i);
  }
  return out;
}

bool ShareFunctions(const Policy& a, const Policy& b, HybridStrictness strictness) {
  for (const auto& x : a.specs) {
    for (const auto& y : b.specs) {
      if (x.id != y.id) continue;
      if (strictness == HybridStrictness::kOpName || x.magnitude == y.magnitude) {
        return true;
      }
    }
  }
  return false;
}

PolicySet AssembleHybrid(const std::vector<ScoredPolicy>& candidates, std::size_t m,
                         HybridStrictness strictness) {
  PolicySet set;
  for (const auto& c : candidates) {
    if (set.size() == m) break;
    const bool clash = std::any_of(
        set.policies.begin(), set.policies.end(), [&](const ScoredPolicy& kept) {
          return ShareFunctions(kept.policy, c.policy, strictness);
        });
    if (!clash) set.policies.push_back(c);
  }
  if (set.size() < m) {
    spdlog::warn("hybrid: only {} of {} requested policies are disjoint ({})",
                 set.size(), m, HybridStrictnessName(strictness));
  }
  set.hybrid_eligible.assign(set.size(), true);
  return set;
}

std::size_t HybridChoice(const PolicySet& set, std::uint64_t seed) {
  if (set.size() == 0) throw Error("hybrid: empty policy set");
  const std::vector<std::size_t> members = set.HybridMembers();
  Rng rng(DeriveSeed(seed, {0x4B1D}));
  return members[rng.Index(members.size())];
}

std::uint64_t HybridPolicySeed(std::uint64_t seed) {
  return DeriveSeed(seed, {0xA991});
}

Tensor HybridApply(const PolicySet& set, const Tensor& image, std::uint64_t seed) {
  const std::size_t chosen = HybridChoice(set, seed);
  return ApplyPolicy(image, set.policies[chosen].policy, HybridPolicySeed(seed));
}

}  // namespace ats
