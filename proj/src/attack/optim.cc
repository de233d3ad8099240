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

#include "ats/optim.h"

#include <cmath>

#include "ats/tensor.h"

namespace ats {
namespace {

double DotProduct(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void CheckSizes(std::size_t n, std::size_t x, std::size_t g) {
  if (x != n || g != n) throw Error("optimizer: parameter size mismatch");
}

}  // namespace

Adam::Adam(std::size_t n, AdamOptions options)
    : options_(options), m_(n, 0.0), v_(n, 0.0) {}

void Adam::Step(std::span<double> x, std::span<const double> grad, double lr) {
  CheckSizes(m_.size(), x.size(), grad.size());
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < x.size(); ++i) {
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * grad[i];
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    x[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
  }
}

Sgd::Sgd(std::size_t n, double momentum)
    : momentum_(momentum), velocity_(n, 0.0) {}

void Sgd::Step(std::span<double> x, std::span<const double> grad, double lr) {
  CheckSizes(velocity_.size(), x.size(), grad.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grad[i];
    x[i] -= lr * velocity_[i];
  }
}

Lbfgs::Lbfgs(std::size_t n, LbfgsOptions options) : options_(options), n_(n) {}

std::vector<double> Lbfgs::Direction(std::span<const double> grad) const {
  std::vector<double> q(grad.begin(), grad.end());
  const std::size_t k = s_.size();
  std::vector<double> alpha(k), rho(k);
  for (std::size_t j = k; j-- > 0;) {
    rho[j] = 1.0 / DotProduct(y_[j], s_[j]);
    alpha[j] = rho[j] * DotProduct(s_[j], q);
    for (std::size_t i = 0; i < n_; ++i) q[i] -= alpha[j] * y_[j][i];
  }
  if (k > 0) {
    const double gamma = DotProduct(s_.back(), y_.back()) /
                         DotProduct(y_.back(), y_.back());
    for (double& v : q) v *= gamma;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double beta = rho[j] * DotProduct(y_[j], q);
    for (std::size_t i = 0; i < n_; ++i) q[i] += (alpha[j] - beta) * s_[j][i];
  }
  for (double& v : q) v = -v;
  return q;
}

int Lbfgs::Step(std::vector<double>& x, double& f, std::vector<double>& grad,
                const Objective& objective, const Projection& project) {
  CheckSizes(n_, x.size(), grad.size());
  std::vector<double> d = Direction(grad);
  double slope = DotProduct(grad, d);
  if (!(slope < 0.0)) {
    // Not a descent direction: drop the curvature history.
    s_.clear();
    y_.clear();
    d = Direction(grad);
    slope = DotProduct(grad, d);
  }

  std::vector<double> trial(n_), trial_grad(n_);
  auto evaluate = [&](double t, std::span<const double> dir) {
    for (std::size_t i = 0; i < n_; ++i) trial[i] = x[i] + t * dir[i];
    if (project) project(trial);
    double value;
    try {
      value = objective(trial, trial_grad);
    } catch (const NumericalError&) {
      return std::nan("");
    }
    return value;
  };

  int evaluations = 0;
  double t = options_.initial_step;
  bool accepted = false;
  double f_new = 0.0;
  for (int h = 0; h <= options_.max_halvings; ++h, t *= 0.5) {
    f_new = evaluate(t, d);
    ++evaluations;
    if (std::isfinite(f_new) && f_new <= f + options_.armijo_c * t * slope) {
      accepted = true;
      break;
    }
  }
  fell_back_ = !accepted;
  if (!accepted) {
    std::vector<double> sd(grad.size());
    for (std::size_t i = 0; i < n_; ++i) sd[i] = -grad[i];
    const double smallest =
        options_.initial_step * std::ldexp(1.0, -options_.max_halvings);
    f_new = evaluate(smallest, sd);
    ++evaluations;
    if (!std::isfinite(f_new)) {
      throw NumericalError("lbfgs: objective is non-finite along every trial");
    }
    s_.clear();
    y_.clear();
  }

  std::vector<double> s(n_), y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    s[i] = trial[i] - x[i];
    y[i] = trial_grad[i] - grad[i];
  }
  if (accepted && DotProduct(s, y) > 1e-12 * DotProduct(y, y)) {
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    if (s_.size() > options_.history) {
      s_.pop_front();
      y_.pop_front();
    }
  } else {
    // Without positive curvature the stored pairs describe a different
    // region; restart from the scaled identity.
    s_.clear();
    y_.clear();
  }
  x = trial;
  grad = trial_grad;
  f = f_new;
  return evaluations;
}

double StepDecay(std::size_t iteration, std::size_t total) {
  double factor = 1.0;
  for (std::size_t eighths : {3u, 5u, 7u}) {
    if (iteration * 8 >= eighths * total) factor *= 0.1;
  }
  return factor;
}

}  // namespace ats
