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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ats/kernels.h"
#include "ats/tensor.h"
#include "fmt/format.h"
#include "tensor/internal.h"

namespace ats::internal {
namespace {

void ExpectArity(OpKind op, std::span<const Tensor> in, std::size_t n) {
  if (in.size() != n) {
    throw Error(fmt::format("{}: expected {} inputs, got {}", OpName(op), n,
                            in.size()));
  }
}

void ExpectSameShape(OpKind op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw Error(fmt::format("{}: shape mismatch {} vs {}", OpName(op),
                            a.shape().ToString(), b.shape().ToString()));
  }
}

void ExpectRank(OpKind op, const Tensor& a, std::size_t rank) {
  if (a.shape().rank() != rank) {
    throw Error(fmt::format("{}: expected rank {}, got shape {}", OpName(op),
                            rank, a.shape().ToString()));
  }
}

template <typename F>
Evaluated Unary(const Tensor& a, F f) {
  Evaluated r{a.shape(), std::vector<double>(a.numel())};
  auto x = a.values();
  for (std::size_t i = 0; i < x.size(); ++i) r.data[i] = f(x[i]);
  return r;
}

double StableSigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Evaluated MatMulEval(const Tensor& a, const Tensor& b) {
  ExpectRank(OpKind::kMatMul, a, 2);
  ExpectRank(OpKind::kMatMul, b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw Error(fmt::format("matmul: shape mismatch {} vs {}",
                            a.shape().ToString(), b.shape().ToString()));
  }
  Evaluated r{Shape{m, n}, std::vector<double>(m * n)};
  kernels::Active().gemm(m, n, k, a.values(), b.values(), r.data);
  return r;
}

Evaluated TransposeEval(const Tensor& a) {
  ExpectRank(OpKind::kTranspose, a, 2);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Evaluated r{Shape{n, m}, std::vector<double>(m * n)};
  auto x = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) r.data[j * m + i] = x[i * n + j];
  return r;
}

// im2col + gemm per batch element.
Evaluated ConvValidEval(const Tensor& x, const Tensor& w) {
  ExpectRank(OpKind::kConvValid, x, 4);
  ExpectRank(OpKind::kConvValid, w, 4);
  const std::size_t batch = x.shape()[0], ch = x.shape()[1];
  const std::size_t h = x.shape()[2], wd = x.shape()[3];
  const std::size_t out_ch = w.shape()[0], kh = w.shape()[2], kw = w.shape()[3];
  if (w.shape()[1] != ch || kh > h || kw > wd) {
    throw Error(fmt::format("conv2d: shape mismatch input {} vs kernel {}",
                            x.shape().ToString(), w.shape().ToString()));
  }
  const std::size_t oh = h - kh + 1, ow = wd - kw + 1;
  const std::size_t patch = ch * kh * kw, pixels = oh * ow;
  Evaluated r{Shape{batch, out_ch, oh, ow},
              std::vector<double>(batch * out_ch * pixels)};
  std::vector<double> col(patch * pixels);
  auto xv = x.values();
  const auto& k = kernels::Active();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xn = xv.data() + n * ch * h * wd;
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t p = 0; p < kh; ++p) {
        for (std::size_t q = 0; q < kw; ++q) {
          double* row = col.data() + ((c * kh + p) * kw + q) * pixels;
          for (std::size_t i = 0; i < oh; ++i) {
            const double* src = xn + (c * h + i + p) * wd + q;
            std::copy(src, src + ow, row + i * ow);
          }
        }
      }
    }
    k.gemm(out_ch, pixels, patch, w.values(), col,
           std::span<double>(r.data).subspan(n * out_ch * pixels,
                                             out_ch * pixels));
  }
  return r;
}

Evaluated Pad2dEval(const Tensor& x, std::size_t ph, std::size_t pw) {
  ExpectRank(OpKind::kPad2d, x, 4);
  const auto& s = x.shape();
  const std::size_t h = s[2], w = s[3], nh = h + 2 * ph, nw = w + 2 * pw;
  Evaluated r{Shape{s[0], s[1], nh, nw},
              std::vector<double>(s[0] * s[1] * nh * nw, 0.0)};
  auto xv = x.values();
  for (std::size_t plane = 0; plane < s[0] * s[1]; ++plane)
    for (std::size_t i = 0; i < h; ++i)
      std::copy_n(xv.data() + (plane * h + i) * w, w,
                  r.data.data() + (plane * nh + i + ph) * nw + pw);
  return r;
}

Evaluated Crop2dEval(const Tensor& x, std::size_t ph, std::size_t pw) {
  ExpectRank(OpKind::kCrop2d, x, 4);
  const auto& s = x.shape();
  if (s[2] <= 2 * ph || s[3] <= 2 * pw) {
    throw Error(fmt::format("crop2d: cannot remove {}x{} border from {}", ph,
                            pw, s.ToString()));
  }
  const std::size_t h = s[2], w = s[3], nh = h - 2 * ph, nw = w - 2 * pw;
  Evaluated r{Shape{s[0], s[1], nh, nw},
              std::vector<double>(s[0] * s[1] * nh * nw)};
  auto xv = x.values();
  for (std::size_t plane = 0; plane < s[0] * s[1]; ++plane)
    for (std::size_t i = 0; i < nh; ++i)
      std::copy_n(xv.data() + (plane * h + i + ph) * w + pw, nw,
                  r.data.data() + (plane * nh + i) * nw);
  return r;
}

Evaluated FlipKernelEval(const Tensor& w) {
  ExpectRank(OpKind::kFlipKernel, w, 4);
  const auto& s = w.shape();
  const std::size_t o = s[0], c = s[1], kh = s[2], kw = s[3];
  Evaluated r{Shape{c, o, kh, kw}, std::vector<double>(w.numel())};
  auto v = w.values();
  for (std::size_t a = 0; a < o; ++a)
    for (std::size_t b = 0; b < c; ++b)
      for (std::size_t p = 0; p < kh; ++p)
        for (std::size_t q = 0; q < kw; ++q)
          r.data[((b * o + a) * kh + (kh - 1 - p)) * kw + (kw - 1 - q)] =
              v[((a * c + b) * kh + p) * kw + q];
  return r;
}

Evaluated Swap01Eval(const Tensor& x) {
  const auto& s = x.shape();
  if (s.rank() < 2) {
    throw Error("swap01: expected rank >= 2, got shape " + s.ToString());
  }
  std::vector<std::size_t> dims = s.dims();
  std::swap(dims[0], dims[1]);
  const std::size_t a = s[0], b = s[1], inner = x.numel() / (a * b);
  Evaluated r{Shape(dims), std::vector<double>(x.numel())};
  auto v = x.values();
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      std::copy_n(v.data() + (i * b + j) * inner, inner,
                  r.data.data() + (j * a + i) * inner);
  return r;
}

Evaluated AvgPoolEval(const Tensor& x) {
  ExpectRank(OpKind::kAvgPool2, x, 4);
  const auto& s = x.shape();
  if (s[2] % 2 != 0 || s[3] % 2 != 0) {
    throw Error("avgpool2x2: spatial extents must be even, got " +
                s.ToString());
  }
  const std::size_t h = s[2], w = s[3], nh = h / 2, nw = w / 2;
  Evaluated r{Shape{s[0], s[1], nh, nw},
              std::vector<double>(s[0] * s[1] * nh * nw)};
  auto v = x.values();
  for (std::size_t plane = 0; plane < s[0] * s[1]; ++plane) {
    const double* src = v.data() + plane * h * w;
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t j = 0; j < nw; ++j)
        r.data[(plane * nh + i) * nw + j] =
            0.25 * (src[2 * i * w + 2 * j] + src[2 * i * w + 2 * j + 1] +
                    src[(2 * i + 1) * w + 2 * j] +
                    src[(2 * i + 1) * w + 2 * j + 1]);
  }
  return r;
}

Evaluated UpsampleEval(const Tensor& x) {
  ExpectRank(OpKind::kUpsample2, x, 4);
  const auto& s = x.shape();
  const std::size_t h = s[2], w = s[3], nh = 2 * h, nw = 2 * w;
  Evaluated r{Shape{s[0], s[1], nh, nw},
              std::vector<double>(s[0] * s[1] * nh * nw)};
  auto v = x.values();
  for (std::size_t plane = 0; plane < s[0] * s[1]; ++plane)
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t j = 0; j < nw; ++j)
        r.data[(plane * nh + i) * nw + j] = v[(plane * h + i / 2) * w + j / 2];
  return r;
}

Evaluated LogSoftmaxEval(const Tensor& x) {
  ExpectRank(OpKind::kLogSoftmax, x, 2);
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  Evaluated r{x.shape(), std::vector<double>(x.numel())};
  auto v = x.values();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = v.data() + i * cols;
    const double mx = *std::max_element(row, row + cols);
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += std::exp(row[j] - mx);
    const double lse = mx + std::log(acc);
    for (std::size_t j = 0; j < cols; ++j) r.data[i * cols + j] = row[j] - lse;
  }
  return r;
}

Evaluated ExpandEval(const Tensor& x, const OpAttrs& at) {
  const std::size_t m = x.numel(), outer = at.a, inner = at.b;
  if (at.shape.numel() != outer * m * inner) {
    throw Error(fmt::format("expand: {} x {} x {} does not fill shape {}",
                            outer, m, inner, at.shape.ToString()));
  }
  Evaluated r{at.shape, std::vector<double>(outer * m * inner)};
  auto v = x.values();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < m; ++i)
      std::fill_n(r.data.data() + (o * m + i) * inner, inner, v[i]);
  return r;
}

Evaluated CollapseEval(const Tensor& x, const OpAttrs& at) {
  const std::size_t m = at.shape.numel(), outer = at.a, inner = at.b;
  if (x.numel() != outer * m * inner) {
    throw Error(fmt::format("collapse: input {} is not {} x {} x {}",
                            x.shape().ToString(), outer, m, inner));
  }
  Evaluated r{at.shape, std::vector<double>(m, 0.0)};
  auto v = x.values();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      const double* src = v.data() + (o * m + i) * inner;
      double acc = 0.0;
      for (std::size_t j = 0; j < inner; ++j) acc += src[j];
      r.data[i] += acc;
    }
  return r;
}

}  // namespace

Evaluated Evaluate(OpKind op, const OpAttrs& at, std::span<const Tensor> in) {
  const auto& k = kernels::Active();
  switch (op) {
    case OpKind::kLeaf:
    case OpKind::kConstant:
      throw Error("leaf and constant nodes are not evaluated");
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      ExpectArity(op, in, 2);
      ExpectSameShape(op, in[0], in[1]);
      Evaluated r{in[0].shape(), std::vector<double>(in[0].numel())};
      if (op == OpKind::kAdd) k.add(in[0].values(), in[1].values(), r.data);
      if (op == OpKind::kSub) k.sub(in[0].values(), in[1].values(), r.data);
      if (op == OpKind::kMul) k.mul(in[0].values(), in[1].values(), r.data);
      return r;
    }
    case OpKind::kScale: {
      ExpectArity(op, in, 1);
      Evaluated r{in[0].shape(), std::vector<double>(in[0].numel())};
      k.scale(at.scalar, in[0].values(), r.data);
      return r;
    }
    case OpKind::kShift:
      ExpectArity(op, in, 1);
      return Unary(in[0], [c = at.scalar](double v) { return v + c; });
    case OpKind::kMatMul:
      ExpectArity(op, in, 2);
      return MatMulEval(in[0], in[1]);
    case OpKind::kTranspose:
      ExpectArity(op, in, 1);
      return TransposeEval(in[0]);
    case OpKind::kConvValid:
      ExpectArity(op, in, 2);
      return ConvValidEval(in[0], in[1]);
    case OpKind::kPad2d:
      ExpectArity(op, in, 1);
      return Pad2dEval(in[0], at.a, at.b);
    case OpKind::kCrop2d:
      ExpectArity(op, in, 1);
      return Crop2dEval(in[0], at.a, at.b);
    case OpKind::kFlipKernel:
      ExpectArity(op, in, 1);
      return FlipKernelEval(in[0]);
    case OpKind::kSwap01:
      ExpectArity(op, in, 1);
      return Swap01Eval(in[0]);
    case OpKind::kRelu:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return v > 0.0 ? v : 0.0; });
    case OpKind::kStep:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case OpKind::kSign:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) {
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      });
    case OpKind::kAbs:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return std::fabs(v); });
    case OpKind::kSigmoid:
      ExpectArity(op, in, 1);
      return Unary(in[0], StableSigmoid);
    case OpKind::kExp:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return std::exp(v); });
    case OpKind::kSqrt:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return std::sqrt(v); });
    case OpKind::kReciprocal:
      ExpectArity(op, in, 1);
      return Unary(in[0], [](double v) { return 1.0 / v; });
    case OpKind::kAvgPool2:
      ExpectArity(op, in, 1);
      return AvgPoolEval(in[0]);
    case OpKind::kUpsample2:
      ExpectArity(op, in, 1);
      return UpsampleEval(in[0]);
    case OpKind::kReshape: {
      ExpectArity(op, in, 1);
      if (at.shape.numel() != in[0].numel()) {
        throw Error(fmt::format("reshape: cannot view {} as {}",
                                in[0].shape().ToString(),
                                at.shape.ToString()));
      }
      auto v = in[0].values();
      return Evaluated{at.shape, std::vector<double>(v.begin(), v.end())};
    }
    case OpKind::kLogSoftmax:
      ExpectArity(op, in, 1);
      return LogSoftmaxEval(in[0]);
    case OpKind::kExpand:
      ExpectArity(op, in, 1);
      return ExpandEval(in[0], at);
    case OpKind::kCollapse:
      ExpectArity(op, in, 1);
      return CollapseEval(in[0], at);
    case OpKind::kConcat: {
      if (in.empty()) throw Error("concat: no inputs");
      std::vector<double> out;
      for (const Tensor& t : in) {
        auto v = t.values();
        out.insert(out.end(), v.begin(), v.end());
      }
      const std::size_t n = out.size();
      return Evaluated{Shape{n}, std::move(out)};
    }
    case OpKind::kSlice: {
      ExpectArity(op, in, 1);
      if (at.b == 0 || at.a + at.b > in[0].numel()) {
        throw Error(fmt::format("slice: range [{}, {}) outside {} elements",
                                at.a, at.a + at.b, in[0].numel()));
      }
      auto v = in[0].values().subspan(at.a, at.b);
      return Evaluated{Shape{at.b}, std::vector<double>(v.begin(), v.end())};
    }
    case OpKind::kEmbed: {
      ExpectArity(op, in, 1);
      if (at.a + in[0].numel() > at.b) {
        throw Error(fmt::format("embed: {} elements at offset {} exceed {}",
                                in[0].numel(), at.a, at.b));
      }
      std::vector<double> out(at.b, 0.0);
      auto v = in[0].values();
      std::copy(v.begin(), v.end(), out.begin() + at.a);
      return Evaluated{Shape{at.b}, std::move(out)};
    }
  }
  throw Error("unknown op");
}

}  // namespace ats::internal
