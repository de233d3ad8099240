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

#ifndef ATS_DATASET_H_
#define ATS_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ats/nn.h"
#include "ats/tensor.h"

namespace ats {

// Labelled images, each [C, H, W] with values in [0, 1].
struct Dataset {
  std::vector<Tensor> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
  // Stacks the selected images into [N, C, H, W].
  Tensor Batch(std::span<const std::size_t> indices) const;
  std::vector<int> BatchLabels(std::span<const std::size_t> indices) const;
  Dataset Subset(std::span<const std::size_t> indices) const;
};

inline constexpr std::size_t kMaxSynthClasses = 10;

struct SynthSpec {
  std::size_t classes = 10;
  std::size_t samples_per_class = 50;
  ImageShape shape{1, 8, 8};
  double noise = 0.03;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Class-conditioned images: each class owns a line-drawn motif (bars,
// diagonals, plus, cross, ring, disk, square, corner) and, for RGB, a hue.
// Samples jitter the motif position, size, contrast and background and add
// clamped gaussian noise. Samples are ordered class by class.
Dataset SynthDataset(const SynthSpec& spec);

}  // namespace ats

#endif  // ATS_DATASET_H_
