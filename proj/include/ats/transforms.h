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

#ifndef ATS_TRANSFORMS_H_
#define ATS_TRANSFORMS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ats/tensor.h"

namespace ats {

enum class TransformId {
  kInvert,
  kContrast,
  kRotate,
  kTranslateX,
  kTranslateY,
  kSharpness,
  kShearY,
  kAutoContrast,
  kEqualize,
  kPosterize,
  kColor,
  kBrightness,
  kSolarize,
};

inline constexpr std::size_t kNumTransformIds = 13;
inline constexpr int kMaxMagnitude = 9;

std::string_view TransformName(TransformId id);
std::optional<TransformId> ParseTransformName(std::string_view name);

struct TransformSpec {
  TransformId id = TransformId::kInvert;
  int magnitude = 0;

  // Validates the magnitude range.
  static TransformSpec Make(TransformId id, int magnitude);
  std::string ToString() const;  // "translateX/9"
  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

// The indexed search space. Duplicate entries are kept as listed.
class PolicyTable {
 public:
  explicit PolicyTable(std::vector<TransformSpec> entries);

  // The 50-entry table the policy notation "i-j-k" indexes into.
  static const PolicyTable& Default();

  std::size_t size() const { return entries_.size(); }
  const TransformSpec& at(std::size_t i) const;
  const std::vector<TransformSpec>& entries() const { return entries_; }

 private:
  std::vector<TransformSpec> entries_;
};

inline constexpr std::size_t kDefaultMaxPolicyLength = 3;

// Ordered sequence of transforms applied left to right. `origin` holds the
// table indices when the policy came from the table.
struct Policy {
  std::vector<TransformSpec> specs;
  std::vector<std::size_t> origin;

  static Policy FromIndices(const std::vector<std::size_t>& indices,
                            const PolicyTable& table);
  bool empty() const { return specs.empty(); }
  // "3-1-7" for table policies, "translateX/9+contrast/6" otherwise; the
  // identity policy is "none".
  std::string Notation() const;
  std::string Describe() const;  // "[translateX/9, contrast/6, translateY/2]"
  friend bool operator==(const Policy&, const Policy&) = default;
};

// Parses dash-separated table indices, e.g. "3-1-7".
Policy ParsePolicy(std::string_view notation, const PolicyTable& table,
                   std::size_t max_length = kDefaultMaxPolicyLength);

// `image` is [C, H, W] with C in {1, 3} and values in [0, 1]. Geometric ops
// draw their direction from `seed`; all other ops ignore it.
Tensor ApplyTransform(const Tensor& image, const TransformSpec& spec,
                      std::uint64_t seed);
Tensor ApplyPolicy(const Tensor& image, const Policy& policy,
                   std::uint64_t seed);

}  // namespace ats

#endif  // ATS_TRANSFORMS_H_
