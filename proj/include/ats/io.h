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

#ifndef ATS_IO_H_
#define ATS_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ats/dataset.h"
#include "ats/nn.h"
#include "ats/tensor.h"

namespace ats {

// 8-bit grayscale or RGB PNG <-> [C, H, W] tensor in [0, 1].
Tensor LoadImage(const std::filesystem::path& path);
// Values are clamped to [0, 1] and rounded to 8 bits.
void SaveImage(const Tensor& image, const std::filesystem::path& path);
std::vector<unsigned char> EncodePng(const Tensor& image);
Tensor DecodePng(const std::vector<unsigned char>& bytes);

// Images laid out as <root>/<label>/<name>.png with integer label
// directories; files are read in lexicographic order.
Dataset LoadImageFolder(const std::filesystem::path& root);

// Tensor container: "ATSR", u16 version, u32 entry count, then per entry a
// u16-length name, u16 rank, u32 extents and little-endian f32 values.
inline constexpr std::uint16_t kTensorFileVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

std::vector<unsigned char> EncodeTensors(const NamedTensors& tensors);
NamedTensors DecodeTensors(const std::vector<unsigned char>& bytes);
void SaveTensors(const NamedTensors& tensors, const std::filesystem::path& path);
NamedTensors LoadTensors(const std::filesystem::path& path);
void SaveTensor(const Tensor& t, const std::filesystem::path& path);
Tensor LoadTensor(const std::filesystem::path& path);

void SaveParams(const ModelParams& params, const std::filesystem::path& path);
// Names, order and shapes must match `like`.
ModelParams LoadParams(const ModelParams& like, const std::filesystem::path& path);

std::vector<unsigned char> ReadFileBytes(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Minimal CSV builder; numbers are written with 17 significant digits.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& Row(std::vector<std::string> cells);
  std::string str() const { return text_; }
  void Save(const std::filesystem::path& path) const { WriteFile(path, text_); }

 private:
  std::size_t columns_;
  std::string text_;
};

std::string CsvNumber(double v);
std::string CsvQuote(std::string_view cell);

}  // namespace ats

#endif  // ATS_IO_H_
