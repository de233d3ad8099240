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

#include "ats/transforms.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ats/random.h"
#include "fmt/format.h"
#include "fmt/ranges.h"

namespace ats {
namespace {

constexpr std::array<std::string_view, kNumTransformIds> kNames = {
    "invert",     "contrast", "rotate",   "translateX", "translateY",
    "sharpness",  "shearY",   "autocontrast", "equalize", "posterize",
    "color",      "brightness", "solarize"};

// Magnitude ranges at m = 9.
constexpr double kMaxRotateDegrees = 30.0;
constexpr double kMaxShear = 0.3;
constexpr double kMaxTranslateFraction = 0.4;

struct Image {
  std::size_t c, h, w;
  std::vector<double> px;

  double& at(std::size_t ch, std::size_t y, std::size_t x) {
    return px[(ch * h + y) * w + x];
  }
  double at(std::size_t ch, std::size_t y, std::size_t x) const {
    return px[(ch * h + y) * w + x];
  }
  // Zero outside the frame.
  double Sample(std::size_t ch, long y, long x) const {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w))
      return 0.0;
    return at(ch, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  }
  double Bilinear(std::size_t ch, double y, double x) const {
    const double fy = std::floor(y), fx = std::floor(x);
    const double dy = y - fy, dx = x - fx;
    const long y0 = static_cast<long>(fy), x0 = static_cast<long>(fx);
    if (dy == 0.0 && dx == 0.0) return Sample(ch, y0, x0);
    return (1 - dy) * ((1 - dx) * Sample(ch, y0, x0) + dx * Sample(ch, y0, x0 + 1)) +
           dy * ((1 - dx) * Sample(ch, y0 + 1, x0) + dx * Sample(ch, y0 + 1, x0 + 1));
  }
};

Image ToImage(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.rank() != 3 || (s[0] != 1 && s[0] != 3)) {
    throw Error("transform: expected a [C, H, W] image with C in {1, 3}, got " +
                s.ToString());
  }
  for (double v : t.values()) {
    if (v < 0.0 || v > 1.0) {
      throw Error(fmt::format("transform: pixel value {} outside [0, 1]", v));
    }
  }
  return Image{s[0], s[1], s[2], t.ToVector()};
}

Tensor FromImage(Image img) {
  for (double& v : img.px) v = std::clamp(v, 0.0, 1.0);
  return Tensor(Shape{img.c, img.h, img.w}, std::move(img.px));
}

double Level(int magnitude) { return static_cast<double>(magnitude) / kMaxMagnitude; }

double EnhanceFactor(int magnitude) { return 0.1 + Level(magnitude) * 1.8; }

// Maps every output pixel through `source(y, x) -> (sy, sx)`.
template <typename F>
Image Warp(const Image& in, F source) {
  Image out{in.c, in.h, in.w, std::vector<double>(in.px.size())};
  for (std::size_t ch = 0; ch < in.c; ++ch)
    for (std::size_t y = 0; y < in.h; ++y)
      for (std::size_t x = 0; x < in.w; ++x) {
        const auto [sy, sx] = source(static_cast<double>(y), static_cast<double>(x));
        out.at(ch, y, x) = in.Bilinear(ch, sy, sx);
      }
  return out;
}

std::vector<double> Luminance(const Image& img) {
  std::vector<double> lum(img.h * img.w);
  for (std::size_t i = 0; i < lum.size(); ++i) {
    lum[i] = img.c == 1 ? img.px[i]
                        : 0.299 * img.px[i] + 0.587 * img.px[lum.size() + i] +
                              0.114 * img.px[2 * lum.size() + i];
  }
  return lum;
}

// out = degenerate + f * (img - degenerate)
Image Blend(const Image& img, const Image& degenerate, double f) {
  Image out = img;
  for (std::size_t i = 0; i < out.px.size(); ++i) {
    out.px[i] = degenerate.px[i] + f * (img.px[i] - degenerate.px[i]);
  }
  return out;
}

Image Contrast(const Image& img, int m) {
  const std::vector<double> lum = Luminance(img);
  double mean = 0.0;
  for (double v : lum) mean += v;
  mean /= static_cast<double>(lum.size());
  Image gray{img.c, img.h, img.w, std::vector<double>(img.px.size(), mean)};
  return Blend(img, gray, EnhanceFactor(m));
}

Image Brightness(const Image& img, int m) {
  Image black{img.c, img.h, img.w, std::vector<double>(img.px.size(), 0.0)};
  return Blend(img, black, EnhanceFactor(m));
}

Image Color(const Image& img, int m) {
  if (img.c == 1) return img;
  const std::vector<double> lum = Luminance(img);
  Image gray = img;
  for (std::size_t ch = 0; ch < 3; ++ch)
    std::copy(lum.begin(), lum.end(), gray.px.begin() + ch * lum.size());
  return Blend(img, gray, EnhanceFactor(m));
}

// Smoothing kernel [[1,1,1],[1,5,1],[1,1,1]] / 13 on the interior; the
// border row and column keep their values.
Image Sharpness(const Image& img, int m) {
  Image smooth = img;
  if (img.h >= 3 && img.w >= 3) {
    for (std::size_t ch = 0; ch < img.c; ++ch)
      for (std::size_t y = 1; y + 1 < img.h; ++y)
        for (std::size_t x = 1; x + 1 < img.w; ++x) {
          double acc = 4.0 * img.at(ch, y, x);
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              acc += img.at(ch, y + dy, x + dx);
          smooth.at(ch, y, x) = acc / 13.0;
        }
  }
  return Blend(img, smooth, EnhanceFactor(m));
}

int Bin(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

Image Posterize(const Image& img, int m) {
  const int bits = 8 - static_cast<int>(std::lround(Level(m) * 4.0));
  const int mask = (0xFF << (8 - bits)) & 0xFF;
  Image out = img;
  for (double& v : out.px) v = static_cast<double>(Bin(v) & mask) / 255.0;
  return out;
}

Image Solarize(const Image& img, int m) {
  const double threshold = 1.0 - Level(m);
  Image out = img;
  for (double& v : out.px) {
    if (v > threshold) v = 1.0 - v;
  }
  return out;
}

Image AutoContrast(const Image& img) {
  Image out = img;
  const std::size_t plane = img.h * img.w;
  for (std::size_t ch = 0; ch < img.c; ++ch) {
    auto first = img.px.begin() + ch * plane;
    int lo = 255, hi = 0;
    for (auto it = first; it != first + plane; ++it) {
      lo = std::min(lo, Bin(*it));
      hi = std::max(hi, Bin(*it));
    }
    if (lo >= hi) continue;
    const double scale = 1.0 / static_cast<double>(hi - lo);
    for (std::size_t i = 0; i < plane; ++i) {
      double& v = out.px[ch * plane + i];
      v = std::clamp((v * 255.0 - lo) * scale, 0.0, 1.0);
    }
  }
  return out;
}

// Histogram equalization over 256 bins with the usual cumulative lookup
// table; a channel whose histogram has a single occupied bin passes through.
Image Equalize(const Image& img) {
  Image out = img;
  const std::size_t plane = img.h * img.w;
  for (std::size_t ch = 0; ch < img.c; ++ch) {
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = 0; i < plane; ++i) ++hist[Bin(img.px[ch * plane + i])];
    std::size_t total = 0, last = 0, occupied = 0;
    for (std::size_t b = 0; b < 256; ++b) {
      if (hist[b] == 0) continue;
      total += hist[b];
      last = hist[b];
      ++occupied;
    }
    if (occupied <= 1) continue;
    // Real-valued step: PIL's integer step is zero below 256 pixels, which
    // would make the op a no-op on small images.
    const double step = static_cast<double>(total - last) / 255.0;
    std::array<int, 256> lut{};
    double n = step / 2.0;
    for (std::size_t b = 0; b < 256; ++b) {
      lut[b] = static_cast<int>(std::min(std::floor(n / step), 255.0));
      n += static_cast<double>(hist[b]);
    }
    for (std::size_t i = 0; i < plane; ++i) {
      double& v = out.px[ch * plane + i];
      v = static_cast<double>(lut[Bin(v)]) / 255.0;
    }
  }
  return out;
}

double RandomSign(std::uint64_t seed) { return Rng(seed).Coin() ? 1.0 : -1.0; }

}  // namespace

std::string_view TransformName(TransformId id) {
  return kNames[static_cast<std::size_t>(id)];
}

std::optional<TransformId> ParseTransformName(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<TransformId>(i);
  }
  return std::nullopt;
}

TransformSpec TransformSpec::Make(TransformId id, int magnitude) {
  if (magnitude < 0 || magnitude > kMaxMagnitude) {
    throw Error(fmt::format("transform magnitude {} outside [0, {}]", magnitude,
                            kMaxMagnitude));
  }
  return TransformSpec{id, magnitude};
}

std::string TransformSpec::ToString() const {
  return fmt::format("{}/{}", TransformName(id), magnitude);
}

PolicyTable::PolicyTable(std::vector<TransformSpec> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error("policy table must not be empty");
  for (const auto& e : entries_) TransformSpec::Make(e.id, e.magnitude);
}

const PolicyTable& PolicyTable::Default() {
  using T = TransformId;
  static const PolicyTable table({
      {T::kInvert, 7},       {T::kContrast, 6},     {T::kRotate, 2},
      {T::kTranslateX, 9},   {T::kSharpness, 1},    {T::kSharpness, 3},
      {T::kShearY, 2},       {T::kTranslateY, 2},   {T::kAutoContrast, 5},
      {T::kEqualize, 2},     {T::kShearY, 5},       {T::kPosterize, 5},
      {T::kColor, 3},        {T::kBrightness, 5},   {T::kSharpness, 9},
      {T::kBrightness, 9},   {T::kEqualize, 5},     {T::kEqualize, 1},
      {T::kContrast, 7},     {T::kSharpness, 5},    {T::kColor, 5},
      {T::kTranslateX, 5},   {T::kEqualize, 7},     {T::kAutoContrast, 8},
      {T::kTranslateY, 3},   {T::kSharpness, 6},    {T::kBrightness, 6},
      {T::kColor, 8},        {T::kSolarize, 0},     {T::kInvert, 0},
      {T::kEqualize, 0},     {T::kAutoContrast, 0}, {T::kEqualize, 8},
      {T::kEqualize, 4},     {T::kColor, 5},        {T::kEqualize, 5},
      {T::kAutoContrast, 4}, {T::kSolarize, 4},     {T::kBrightness, 3},
      {T::kColor, 0},        {T::kSolarize, 1},     {T::kAutoContrast, 0},
      {T::kTranslateY, 3},   {T::kTranslateY, 4},   {T::kAutoContrast, 1},
      {T::kSolarize, 1},     {T::kEqualize, 5},     {T::kInvert, 1},
      {T::kTranslateY, 3},   {T::kAutoContrast, 1},
  });
  return table;
}

const TransformSpec& PolicyTable::at(std::size_t i) const {
  if (i >= entries_.size()) {
    throw Error(fmt::format("policy index {} outside [0, {})", i,
                            entries_.size()));
  }
  return entries_[i];
}

Policy Policy::FromIndices(const std::vector<std::size_t>& indices,
                           const PolicyTable& table) {
  Policy p;
  for (std::size_t i : indices) p.specs.push_back(table.at(i));
  p.origin = indices;
  return p;
}

std::string Policy::Notation() const {
  if (specs.empty()) return "none";
  if (origin.size() == specs.size()) return fmt::format("{}", fmt::join(origin, "-"));
  std::vector<std::string> parts;
  for (const auto& s : specs) parts.push_back(s.ToString());
  return fmt::format("{}", fmt::join(parts, "+"));
}

std::string Policy::Describe() const {
  std::vector<std::string> parts;
  for (const auto& s : specs) parts.push_back(s.ToString());
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

Policy ParsePolicy(std::string_view notation, const PolicyTable& table,
                   std::size_t max_length) {
  if (notation.empty()) throw Error("policy notation is empty");
  std::vector<std::size_t> indices;
  std::size_t start = 0;
  while (true) {
    const std::size_t dash = notation.find('-', start);
    const std::string_view part = notation.substr(
        start, dash == std::string_view::npos ? std::string_view::npos : dash - start);
    std::size_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error(fmt::format("policy notation '{}': '{}' is not an index",
                              notation, part));
    }
    if (value >= table.size()) {
      throw Error(fmt::format("policy notation '{}': index {} outside [0, {})",
                              notation, value, table.size()));
    }
    indices.push_back(value);
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  if (indices.size() > max_length) {
    throw Error(fmt::format("policy notation '{}': more than {} transforms",
                            notation, max_length));
  }
  return Policy::FromIndices(indices, table);
}

Tensor ApplyTransform(const Tensor& image, const TransformSpec& spec,
                      std::uint64_t seed) {
  TransformSpec::Make(spec.id, spec.magnitude);
  const Image img = ToImage(image.Detach());
  const int m = spec.magnitude;
  const double cy = (static_cast<double>(img.h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.w) - 1.0) / 2.0;
  switch (spec.id) {
    case TransformId::kInvert: {
      Image out = img;
      for (double& v : out.px) v = 1.0 - v;
      return FromImage(std::move(out));
    }
    case TransformId::kContrast:
      return FromImage(Contrast(img, m));
    case TransformId::kBrightness:
      return FromImage(Brightness(img, m));
    case TransformId::kColor:
      return FromImage(Color(img, m));
    case TransformId::kSharpness:
      return FromImage(Sharpness(img, m));
    case TransformId::kRotate: {
      const double theta = RandomSign(seed) * Level(m) * kMaxRotateDegrees *
                           std::numbers::pi / 180.0;
      const double c = std::cos(theta), s = std::sin(theta);
      return FromImage(Warp(img, [&](double y, double x) {
        const double dy = y - cy, dx = x - cx;
        return std::pair{cy + c * dy - s * dx, cx + s * dy + c * dx};
      }));
    }
    case TransformId::kShearY: {
      const double k = RandomSign(seed) * Level(m) * kMaxShear;
      return FromImage(Warp(img, [&](double y, double x) {
        return std::pair{y - k * (x - cx), x};
      }));
    }
    case TransformId::kTranslateX: {
      const double shift = RandomSign(seed) * Level(m) * kMaxTranslateFraction *
                           static_cast<double>(img.w);
      return FromImage(Warp(img, [&](double y, double x) {
        return std::pair{y, x - shift};
      }));
    }
    case TransformId::kTranslateY: {
      const double shift = RandomSign(seed) * Level(m) * kMaxTranslateFraction *
                           static_cast<double>(img.h);
      return FromImage(Warp(img, [&](double y, double x) {
        return std::pair{y - shift, x};
      }));
    }
    case TransformId::kAutoContrast:
      return FromImage(AutoContrast(img));
    case TransformId::kEqualize:
      return FromImage(Equalize(img));
    case TransformId::kPosterize:
      return FromImage(Posterize(img, m));
    case TransformId::kSolarize:
      return FromImage(Solarize(img, m));
  }
  throw Error("unknown transform");
}

Tensor ApplyPolicy(const Tensor& image, const Policy& policy,
                   std::uint64_t seed) {
  Tensor out = image.Detach();
  for (std::size_t i = 0; i < policy.specs.size(); ++i) {
    out = ApplyTransform(out, policy.specs[i], DeriveSeed(seed, {i}));
  }
  if (policy.specs.empty()) ToImage(out);
  return out;
}

}  // namespace ats
