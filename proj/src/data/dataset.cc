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

#include "ats/dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ats/random.h"
#include "fmt/format.h"

namespace ats {

Tensor Dataset::Batch(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw Error("dataset: empty batch");
  const Shape& s = images.at(indices[0]).shape();
  std::vector<double> out;
  out.reserve(indices.size() * s.numel());
  for (std::size_t i : indices) {
    const Tensor& img = images.at(i);
    if (img.shape() != s) throw Error("dataset: images differ in shape");
    out.insert(out.end(), img.values().begin(), img.values().end());
  }
  return Tensor(Shape{indices.size(), s[0], s[1], s[2]}, std::move(out));
}

std::vector<int> Dataset::BatchLabels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  for (std::size_t i : indices) out.push_back(labels.at(i));
  return out;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  for (std::size_t i : indices) {
    out.images.push_back(images.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

void SynthSpec::Validate() const {
  if (classes < 2 || classes > kMaxSynthClasses) {
    throw Error(fmt::format("synth: classes must be in [2, {}], got {}",
                            kMaxSynthClasses, classes));
  }
  if (samples_per_class == 0) throw Error("synth: samples_per_class must be positive");
  if (shape.channels != 1 && shape.channels != 3) {
    throw Error(fmt::format("synth: channels must be 1 or 3, got {}", shape.channels));
  }
  if (shape.height < 6 || shape.width < 6) throw Error("synth: images must be at least 6x6");
  if (!(noise >= 0.0)) throw Error("synth: noise must be non-negative");
}

namespace {

struct Segment {
  double y0, x0, y1, x1;
};

double SegmentDistance(const Segment& s, double y, double x) {
  const double dy = s.y1 - s.y0, dx = s.x1 - s.x0;
  const double len2 = dy * dy + dx * dx;
  double t = len2 > 0.0 ? ((y - s.y0) * dy + (x - s.x0) * dx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double py = s.y0 + t * dy - y, px = s.x0 + t * dx - x;
  return std::sqrt(py * py + px * px);
}

// Distance from (y, x) to the skeleton of motif `c`, drawn at the origin
// with half-size r.
double MotifDistance(std::size_t c, double r, double y, double x) {
  auto segs = [&](std::initializer_list<Segment> list) {
    double d = 1e9;
    for (const auto& s : list) d = std::min(d, SegmentDistance(s, y, x));
    return d;
  };
  const double radius = std::sqrt(y * y + x * x);
  switch (c) {
    case 0: return segs({{0, -r, 0, r}});                             // horizontal bar
    case 1: return segs({{-r, 0, r, 0}});                             // vertical bar
    case 2: return segs({{-r, -r, r, r}});                            // diagonal
    case 3: return segs({{-r, r, r, -r}});                            // anti-diagonal
    case 4: return segs({{0, -r, 0, r}, {-r, 0, r, 0}});              // plus
    case 5: return segs({{-r, -r, r, r}, {-r, r, r, -r}});            // cross
    case 6: return std::fabs(radius - r);                             // ring
    case 7: return std::max(0.0, radius - 0.5 * r);                   // disk
    case 8: return segs({{-r, -r, -r, r}, {r, -r, r, r}, {-r, -r, r, -r}, {-r, r, r, r}});
    default: return segs({{-r, -r, -r, r}, {-r, -r, r, -r}});         // corner
  }
}

}  // namespace

Dataset SynthDataset(const SynthSpec& spec) {
  spec.Validate();
  const double h = static_cast<double>(spec.shape.height);
  const double w = static_cast<double>(spec.shape.width);
  const double size = std::min(h, w);
  Dataset data;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double hue = 2.0 * std::numbers::pi * static_cast<double>(c) /
                       static_cast<double>(spec.classes);
    std::array<double, 3> tint{};
    for (std::size_t ch = 0; ch < 3; ++ch) {
      tint[ch] = 0.6 + 0.4 * std::cos(hue + 2.0 * std::numbers::pi * ch / 3.0);
    }
    for (std::size_t n = 0; n < spec.samples_per_class; ++n) {
      Rng rng(DeriveSeed(spec.seed, {0x5E7, c, n}));
      const double cy = (h - 1.0) / 2.0 + rng.Uniform(-1.0, 1.0) * size / 8.0;
      const double cx = (w - 1.0) / 2.0 + rng.Uniform(-1.0, 1.0) * size / 8.0;
      const double r = size * rng.Uniform(0.22, 0.3);
      const double width = size * 0.07;
      const double peak = rng.Uniform(0.6, 0.9);
      const double background = rng.Uniform(0.05, 0.25);
      std::vector<double> px(spec.shape.numel());
      for (std::size_t ch = 0; ch < spec.shape.channels; ++ch) {
        const double gain = spec.shape.channels == 3 ? tint[ch] : 1.0;
        for (std::size_t y = 0; y < spec.shape.height; ++y) {
          for (std::size_t x = 0; x < spec.shape.width; ++x) {
            const double d = MotifDistance(c, r, static_cast<double>(y) - cy,
                                           static_cast<double>(x) - cx);
            const double ink = std::exp(-d * d / (2.0 * width * width));
            const double v = background + gain * peak * ink + spec.noise * rng.Normal();
            px[(ch * spec.shape.height + y) * spec.shape.width + x] = std::clamp(v, 0.0, 1.0);
          }
        }
      }
      data.images.emplace_back(spec.shape.AsShape(), std::move(px));
      data.labels.push_back(static_cast<int>(c));
    }
  }
  return data;
}

}  // namespace ats
