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

#ifndef ATS_OPTIM_H_
#define ATS_OPTIM_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace ats {

// Objective over a flat parameter vector: returns f(x) and writes the
// gradient into `grad` (already sized like x).
using Objective =
    std::function<double(std::span<const double> x, std::span<double> grad)>;
// In-place projection onto the feasible set, applied after every step.
using Projection = std::function<void(std::span<double> x)>;

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam.
class Adam {
 public:
  explicit Adam(std::size_t n, AdamOptions options = {});
  void Step(std::span<double> x, std::span<const double> grad, double lr);
  std::size_t steps() const { return t_; }

 private:
  AdamOptions options_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

// Plain gradient descent with optional heavy-ball momentum.
class Sgd {
 public:
  Sgd(std::size_t n, double momentum);
  void Step(std::span<double> x, std::span<const double> grad, double lr);

 private:
  double momentum_;
  std::vector<double> velocity_;
};

struct LbfgsOptions {
  std::size_t history = 10;
  double armijo_c = 1e-4;
  int max_halvings = 20;
  double initial_step = 1.0;
};

// Limited-memory BFGS with a backtracking Armijo line search. When the line
// search fails, a steepest-descent step of the smallest trial length is
// taken instead.
class Lbfgs {
 public:
  Lbfgs(std::size_t n, LbfgsOptions options = {});

  // Advances x by one iteration. `f` and `grad` hold the objective at x on
  // entry and at the new x on exit. Returns the number of objective
  // evaluations used.
  int Step(std::vector<double>& x, double& f, std::vector<double>& grad,
           const Objective& objective, const Projection& project = nullptr);

  std::size_t history_size() const { return s_.size(); }
  bool last_step_fell_back() const { return fell_back_; }

 private:
  std::vector<double> Direction(std::span<const double> grad) const;

  LbfgsOptions options_;
  std::size_t n_;
  std::deque<std::vector<double>> s_, y_;
  bool fell_back_ = false;
};

// Step-decay multiplier: 1, then x0.1 at 3/8, 5/8 and 7/8 of `total`.
double StepDecay(std::size_t iteration, std::size_t total);

}  // namespace ats

#endif  // ATS_OPTIM_H_
