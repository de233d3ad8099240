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

#include "ats/scores.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "Eigen/Dense"
#include "ats/attack.h"
#include "ats/metrics.h"
#include "ats/random.h"
#include "fmt/format.h"
#include "spdlog/spdlog.h"

namespace ats {
namespace {

Tensor Interpolate(const Tensor& a, const Tensor& b, double t) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * a.at(i) + t * b.at(i);
  return Tensor(a.shape(), std::move(v));
}

// Sum of sorted values, so the result does not depend on input order.
double OrderFreeMean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::vector<std::size_t> DrawBatch(std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(batch, n);
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.Index(n - i)]);
  idx.resize(take);
  return idx;
}

}  // namespace

std::uint64_t SampleKey(const Tensor& image, int label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  for (double v : image.values()) mix(std::bit_cast<std::uint64_t>(v));
  mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(label)));
  return h;
}

std::vector<GradSimPoint> GradSimCurve(const Model& model, const ModelParams& params,
                                       const Tensor& x0, const Tensor& target,
                                       int label, std::size_t steps) {
  if (steps == 0) throw Error("gradsim curve: need at least one step");
  if (x0.shape() != target.shape()) throw Error("gradsim curve: shape mismatch");
  const Labels y = Labels::Single(label);
  const Tensor g_target = FlattenGrads(model.LossGradients(params, target, y));
  std::vector<GradSimPoint> curve;
  for (std::size_t j = 0; j < steps; ++j) {
    const double i = static_cast<double>(j) / static_cast<double>(steps);
    const Tensor g = FlattenGrads(model.LossGradients(params, Interpolate(x0, target, i), y));
    curve.push_back({i, CosineSimilarity(g.values(), g_target.values())});
  }
  return curve;
}

std::vector<std::optional<std::vector<GradSimPoint>>> PrivacyCurves(
    const Model& model, const ModelParams& semi_trained, const Policy& policy,
    const Dataset& samples, const PrivacyScoreOptions& options, std::uint64_t seed) {
  std::vector<std::optional<std::vector<GradSimPoint>>> curves;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Tensor& x = samples.images[n];
    const std::uint64_t key = SampleKey(x, samples.labels[n]);
    const Tensor transformed = ApplyPolicy(x, policy, DeriveSeed(seed, {0x7F, key}));
    const Tensor x0 = GaussianStart(x.shape(), DeriveSeed(seed, {0x5A, key}));
    try {
      curves.emplace_back(
          GradSimCurve(model, semi_trained, x0, transformed, samples.labels[n], options.steps));
    } catch (const NumericalError& e) {
      spdlog::warn("privacy score: sample {} skipped: {}", n, e.what());
      curves.emplace_back();
    }
  }
  return curves;
}

double PrivacyScore(const Model& model, const ModelParams& semi_trained,
                    const Policy& policy, const Dataset& samples,
                    const PrivacyScoreOptions& options, std::uint64_t seed) {
  if (samples.size() == 0) throw Error("privacy score: no samples");
  std::vector<double> per_sample;
  for (const auto& curve : PrivacyCurves(model, semi_trained, policy, samples, options, seed)) {
    if (!curve) continue;
    double area = 0.0;
    for (const GradSimPoint& p : *curve) area += p.similarity;
    per_sample.push_back(area / static_cast<double>(options.steps));
  }
  if (per_sample.empty()) {
    throw NumericalError(fmt::format("privacy score: every sample of policy {} "
                                     "has a degenerate gradient",
                                     policy.Notation()));
  }
  return OrderFreeMean(std::move(per_sample));
}

Tensor InputJacobian(const Model& model, const ModelParams& params, const Tensor& batch) {
  if (batch.shape().rank() != 4) {
    throw Error("input jacobian: expected [N, C, H, W], got " + batch.shape().ToString());
  }
  Graph graph;
  const Tensor x = graph.Variable(batch);
  const Tensor total = Sum(model.Forward(params, x));
  const Tensor grad = Backward(total, x, false);
  const std::size_t n = batch.shape()[0];
  return Tensor(Shape{n, batch.numel() / n}, grad.ToVector());
}

double EigenvalueScore(const std::vector<double>& eigenvalues, double eps) {
  if (eigenvalues.empty()) throw Error("accuracy score: no eigenvalues");
  double total = 0.0;
  for (double s : eigenvalues) {
    // Round-off can leave tiny negative eigenvalues of a PSD matrix.
    const double t = std::max(s, 0.0) + eps;
    total += std::log(t) + 1.0 / t;
  }
  return -total / static_cast<double>(eigenvalues.size());
}

double JacobianScore(const Tensor& jacobian, double eps) {
  if (jacobian.shape().rank() != 2) throw Error("accuracy score: jacobian must be [N, D]");
  const auto n = static_cast<Eigen::Index>(jacobian.shape()[0]);
  const auto d = static_cast<Eigen::Index>(jacobian.shape()[1]);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double v = jacobian.at(static_cast<std::size_t>(r * d + c));
      if (!std::isfinite(v)) throw NumericalError("accuracy score: non-finite jacobian");
      z(r, c) = v;
    }
    z.row(r).array() -= z.row(r).mean();
    const double norm = z.row(r).norm();
    if (norm == 0.0) {
      throw NumericalError(fmt::format("accuracy score: jacobian row {} is constant", r));
    }
    z.row(r) /= norm;
  }
  const Eigen::MatrixXd corr = z * z.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("accuracy score: eigensolver failed");
  }
  const Eigen::VectorXd ev = solver.eigenvalues();
  return EigenvalueScore(std::vector<double>(ev.data(), ev.data() + ev.size()), eps);
}

double AccuracyScore(const Model& model, const ModelParams& random_model,
                     const Policy& policy, const Dataset& data,
                     const AccuracyScoreOptions& options, std::uint64_t seed) {
  if (data.size() == 0) throw Error("accuracy score: empty dataset");
  if (options.rounds == 0 || options.batch == 0) {
    throw Error("accuracy score: rounds and batch must be positive");
  }
  ModelParams params = random_model;
  SgdState sgd;
  std::vector<double> scores;
  for (std::size_t r = 0; r < options.rounds; ++r) {
    Rng rng(DeriveSeed(seed, {0xACC, r}));
    const std::vector<std::size_t> idx = DrawBatch(data.size(), options.batch, rng);
    Dataset batch;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      batch.images.push_back(ApplyPolicy(data.images[idx[i]], policy,
                                         DeriveSeed(seed, {0xACC, r, i})));
      batch.labels.push_back(data.labels[idx[i]]);
    }
    std::vector<std::size_t> all(idx.size());
    std::iota(all.begin(), all.end(), 0);
    const Tensor x = batch.Batch(all);
    scores.push_back(JacobianScore(InputJacobian(model, params, x)));
    if (r + 1 < options.rounds) {
      const GradientVector g = model.LossGradients(params, x, Labels::Hard(batch.labels));
      params = SgdUpdate(params, g, sgd, options.learning_rate, options.sgd);
    }
  }
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(scores.size());
}

}  // namespace ats
