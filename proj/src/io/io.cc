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

#include "ats/io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>

#include "fmt/format.h"

namespace ats {
namespace {

namespace fs = std::filesystem;

struct PngContext {
  std::string error;
  const std::vector<unsigned char>* input = nullptr;
  std::size_t offset = 0;
  std::vector<unsigned char>* output = nullptr;
};

[[noreturn]] void PngError(png_structp png, png_const_charp message) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  ctx->error = message;
  png_longjmp(png, 1);
}

void PngWarning(png_structp, png_const_charp) {}

void PngRead(png_structp png, png_bytep data, png_size_t length) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  if (ctx->offset + length > ctx->input->size()) png_error(png, "truncated PNG data");
  std::memcpy(data, ctx->input->data() + ctx->offset, length);
  ctx->offset += length;
}

void PngWrite(png_structp png, png_bytep data, png_size_t length) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  ctx->output->insert(ctx->output->end(), data, data + length);
}

void PngFlush(png_structp) {}

void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}
  std::uint64_t Take(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      throw Error(fmt::format("tensor file: truncated while reading {}", what));
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }
  std::string TakeString(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error("tensor file: truncated while reading a name");
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> EncodePng(const Tensor& image) {
  if (image.shape().rank() != 3 ||
      (image.shape()[0] != 1 && image.shape()[0] != 3)) {
    throw Error(fmt::format("save image: expected [1|3, H, W], got {}",
                            image.shape().ToString()));
  }
  const std::size_t c = image.shape()[0], h = image.shape()[1], w = image.shape()[2];
  if (h == 0 || w == 0) throw Error("save image: empty image");
  std::vector<unsigned char> pixels(c * h * w);
  const auto v = image.values();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double p = std::clamp(v[(ch * h + y) * w + x], 0.0, 1.0);
        pixels[(y * w + x) * c + ch] = static_cast<unsigned char>(std::lround(p * 255.0));
      }

  std::vector<unsigned char> out;
  PngContext ctx;
  ctx.output = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, PngError, PngWarning);
  if (!png) throw Error("save image: libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(fmt::format("save image: {}", ctx.error));
  }
  png_set_write_fn(png, &ctx, PngWrite, PngFlush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  for (std::size_t y = 0; y < h; ++y) png_write_row(png, pixels.data() + y * w * c);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Tensor DecodePng(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error("load image: not a PNG file");
  }
  PngContext ctx;
  ctx.input = &bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, PngError, PngWarning);
  if (!png) throw Error("load image: libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  std::vector<unsigned char> pixels;
  png_uint_32 w = 0, h = 0;
  int depth = 0, color = 0;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(fmt::format("load image: {}", ctx.error));
  }
  png_set_read_fn(png, &ctx, PngRead);
  png_read_info(png, info);
  png_get_IHDR(png, info, &w, &h, &depth, &color, nullptr, nullptr, nullptr);
  if (depth != 8 || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(fmt::format(
        "load image: unsupported format (bit depth {}, colour type {}); "
        "expected 8-bit grayscale or RGB", depth, color));
  }
  const std::size_t c = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;
  pixels.resize(std::size_t{w} * h * c);
  for (std::size_t y = 0; y < h; ++y) png_read_row(png, pixels.data() + y * w * c, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<double> v(pixels.size());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        v[(ch * h + y) * w + x] = pixels[(y * w + x) * c + ch] / 255.0;
  return Tensor(Shape{c, std::size_t{h}, std::size_t{w}}, std::move(v));
}

std::vector<unsigned char> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

namespace {

void WriteBytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  WriteFile(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace

Tensor LoadImage(const fs::path& path) {
  try {
    return DecodePng(ReadFileBytes(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{} ({})", e.what(), path.string()));
  }
}

void SaveImage(const Tensor& image, const fs::path& path) { WriteBytes(path, EncodePng(image)); }

Dataset LoadImageFolder(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(fmt::format("dataset: '{}' is not a directory", root.string()));
  }
  std::vector<std::pair<int, fs::path>> classes;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    int label = 0;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), label);
    if (ec != std::errc() || ptr != name.data() + name.size() || label < 0) {
      throw Error(fmt::format("dataset: class directory '{}' is not a label", name));
    }
    classes.emplace_back(label, entry.path());
  }
  std::sort(classes.begin(), classes.end());
  Dataset data;
  for (const auto& [label, dir] : classes) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      data.images.push_back(LoadImage(f));
      data.labels.push_back(label);
      if (data.images.back().shape() != data.images.front().shape()) {
        throw Error(fmt::format("dataset: '{}' has shape {}, expected {}", f.string(),
                                data.images.back().shape().ToString(),
                                data.images.front().shape().ToString()));
      }
    }
  }
  if (data.images.empty()) throw Error(fmt::format("dataset: no images under '{}'", root.string()));
  return data;
}

std::vector<unsigned char> EncodeTensors(const NamedTensors& tensors) {
  std::vector<unsigned char> out = {'A', 'T', 'S', 'R'};
  PutU16(out, kTensorFileVersion);
  PutU32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error("tensor file: name too long");
    }
    PutU16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    PutU16(out, static_cast<std::uint16_t>(t.shape().rank()));
    for (std::size_t d : t.shape().dims()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) throw Error("tensor file: extent overflow");
      PutU32(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.values()) PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

NamedTensors DecodeTensors(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ATSR", 4) != 0) {
    throw Error("tensor file: bad magic (expected ATSR)");
  }
  Reader r(bytes);
  r.Take(4, "magic");
  const auto version = r.Take(2, "version");
  if (version != kTensorFileVersion) {
    throw Error(fmt::format("tensor file: unsupported version {}", version));
  }
  const auto count = r.Take(4, "entry count");
  NamedTensors out;
  for (std::uint64_t e = 0; e < count; ++e) {
    std::string name = r.TakeString(r.Take(2, "name length"));
    const auto rank = r.Take(2, "rank");
    std::vector<std::size_t> dims;
    std::uint64_t numel = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      const auto d = r.Take(4, "extent");
      dims.push_back(d);
      if (d != 0 && numel > (std::numeric_limits<std::uint64_t>::max() / 4) / d) {
        throw Error("tensor file: extent overflow");
      }
      numel *= d;
    }
    if (numel * 4 > r.remaining()) {
      throw Error(fmt::format("tensor file: truncated payload for '{}' ({} values, {} bytes left)",
                              name, numel, r.remaining()));
    }
    std::vector<double> v(numel);
    for (double& x : v) {
      x = std::bit_cast<float>(static_cast<std::uint32_t>(r.Take(4, "payload")));
    }
    out.emplace_back(std::move(name), Tensor(Shape(std::move(dims)), std::move(v)));
  }
  if (r.remaining() != 0) {
    throw Error(fmt::format("tensor file: {} trailing bytes", r.remaining()));
  }
  return out;
}

void SaveTensors(const NamedTensors& tensors, const fs::path& path) {
  WriteBytes(path, EncodeTensors(tensors));
}

NamedTensors LoadTensors(const fs::path& path) { return DecodeTensors(ReadFileBytes(path)); }

void SaveTensor(const Tensor& t, const fs::path& path) { SaveTensors({{"", t}}, path); }

Tensor LoadTensor(const fs::path& path) {
  NamedTensors all = LoadTensors(path);
  if (all.size() != 1) {
    throw Error(fmt::format("tensor file '{}': expected 1 tensor, found {}", path.string(),
                            all.size()));
  }
  return std::move(all[0].second);
}

void SaveParams(const ModelParams& params, const fs::path& path) {
  NamedTensors out;
  for (const auto& l : params.layers) out.emplace_back(l.name, l.value);
  SaveTensors(out, path);
}

ModelParams LoadParams(const ModelParams& like, const fs::path& path) {
  NamedTensors in = LoadTensors(path);
  if (in.size() != like.size()) {
    throw Error(fmt::format("checkpoint '{}': {} tensors, model has {}", path.string(),
                            in.size(), like.size()));
  }
  ModelParams out = like;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i].first != like.layers[i].name ||
        in[i].second.shape() != like.layers[i].value.shape()) {
      throw Error(fmt::format("checkpoint '{}': entry {} is {} {}, expected {} {}",
                              path.string(), i, in[i].first, in[i].second.shape().ToString(),
                              like.layers[i].name, like.layers[i].value.shape().ToString()));
    }
    out.layers[i].value = std::move(in[i].second);
  }
  return out;
}

std::string CsvNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string CsvQuote(std::string_view cell) {
  if (cell.find_first_of(",\"\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) { Row(std::move(header)); }

Csv& Csv::Row(std::vector<std::string> cells) {
  if (cells.size() != columns_) {
    throw Error(fmt::format("csv: row has {} cells, header has {}", cells.size(), columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += CsvQuote(cells[i]);
  }
  text_ += '\n';
  return *this;
}

}  // namespace ats
