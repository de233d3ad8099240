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

#include "ats/search.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "fmt/format.h"
#include "spdlog/spdlog.h"

namespace ats {
namespace {

constexpr std::size_t kChunk = 16;

template <typename Fn>
void ParallelFor(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Dataset PrivacySamples(const Dataset& data, const SearchConfig& cfg) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(cfg.privacy_samples, data.size());
  Rng rng(DeriveSeed(cfg.seed, {0x9A}));
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.Index(idx.size() - i)]);
  idx.resize(take);
  return data.Subset(idx);
}

bool Passes(double s_acc, const SearchConfig& cfg) {
  return std::isfinite(s_acc) && s_acc >= cfg.t_acc;
}

struct Scores {
  double s_acc = 0.0;
  std::optional<double> s_pri;
};

}  // namespace

ModelParams SemiTrain(const Model& model, const ModelParams& init, const Dataset& data,
                      const SemiTrainOptions& options, std::uint64_t seed) {
  if (data.size() < 10) {
    throw Error(fmt::format("semi-train: need at least 10 samples, got {}", data.size()));
  }
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
    throw Error(fmt::format("semi-train: fraction must be in (0, 1], got {}", options.fraction));
  }
  const auto take = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(options.fraction * data.size())));
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(DeriveSeed(seed, {0x5E1}));
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.Index(idx.size() - i)]);
  idx.resize(take);

  TrainConfig cfg = options.train;
  cfg.participants = 1;
  cfg.epochs = options.epochs;
  cfg.policies.reset();
  cfg.defense.reset();
  cfg.seed = DeriveSeed(seed, {0x5E2});
  return RunTraining(model, init, cfg, data.Subset(idx), Dataset{}).params;
}

Policy SamplePolicy(Rng& rng, std::size_t k, const PolicyTable& table) {
  if (table.size() == 0) throw Error("sample policy: empty table");
  if (k == 0) throw Error("sample policy: k must be at least 1");
  const std::size_t length = 1 + rng.Index(k);
  std::vector<std::size_t> indices(length);
  for (std::size_t& i : indices) i = rng.Index(table.size());
  return Policy::FromIndices(indices, table);
}

void SearchConfig::Validate() const {
  if (n == 0) throw Error("search: n must be at least 1");
  if (c_max < n) throw Error(fmt::format("search: c_max ({}) must be at least n ({})", c_max, n));
  if (k == 0) throw Error("search: k must be at least 1");
  if (privacy_samples == 0) throw Error("search: privacy_samples must be positive");
  if (privacy.steps == 0) throw Error("search: integration steps must be positive");
  if (accuracy.batch == 0 || accuracy.rounds == 0) {
    throw Error("search: accuracy batch and rounds must be positive");
  }
  if (hybrid_size == 0) throw Error("search: hybrid size must be at least 1");
  if (std::isnan(t_acc)) throw Error("search: t_acc is NaN");
}

double SearchAccuracyScore(const Model& model, const ModelParams& m_r, const Policy& policy,
                           const Dataset& data, const SearchConfig& cfg) {
  return AccuracyScore(model, m_r, policy, data, cfg.accuracy, DeriveSeed(cfg.seed, {0xACC5}));
}

double SearchPrivacyScore(const Model& model, const ModelParams& m_s, const Policy& policy,
                          const Dataset& data, const SearchConfig& cfg) {
  return PrivacyScore(model, m_s, policy, PrivacySamples(data, cfg), cfg.privacy,
                      DeriveSeed(cfg.seed, {0x9B}));
}

Dataset SearchPrivacySamples(const Dataset& data, const SearchConfig& cfg) {
  return PrivacySamples(data, cfg);
}

std::vector<std::optional<std::vector<GradSimPoint>>> SearchPrivacyCurves(
    const Model& model, const ModelParams& m_s, const Policy& policy, const Dataset& data,
    const SearchConfig& cfg) {
  return PrivacyCurves(model, m_s, policy, PrivacySamples(data, cfg), cfg.privacy,
                       DeriveSeed(cfg.seed, {0x9B}));
}

SearchResult Search(const SearchConfig& cfg, const Model& model, const ModelParams& m_s,
                    const ModelParams& m_r, const Dataset& data, const PolicyTable& table) {
  cfg.Validate();
  if (data.size() == 0) throw Error("search: empty dataset");
  const Dataset privacy_data = PrivacySamples(data, cfg);
  const std::uint64_t acc_seed = DeriveSeed(cfg.seed, {0xACC5});
  const std::uint64_t pri_seed = DeriveSeed(cfg.seed, {0x9B});
  const std::size_t hard_cap = 10 * cfg.c_max;

  // Scores are deterministic per policy, so repeated draws reuse them.
  std::map<std::vector<std::size_t>, Scores> cache;
  std::atomic<std::size_t> acc_calls{0}, pri_calls{0};
  SearchResult result;
  std::vector<ScoredPolicy> kept;  // ascending S_pri, ties by draw
  std::size_t accepted_distinct = 0;
  bool done = false;

  while (!done && result.draws < hard_cap) {
    const std::size_t begin = result.draws;
    std::size_t end = std::min(begin + kChunk, hard_cap);
    if (begin < cfg.c_max) end = std::min(end, cfg.c_max);

    std::vector<Policy> drawn;
    for (std::size_t d = begin; d < end; ++d) {
      Rng rng(DeriveSeed(cfg.seed, {0x5EA, d}));
      drawn.push_back(SamplePolicy(rng, cfg.k, table));
    }
    // Accuracy for new policies, then privacy for the new accepted ones.
    std::vector<const Policy*> fresh;
    for (const Policy& p : drawn) {
      if (cache.emplace(p.origin, Scores{}).second) fresh.push_back(&p);
    }
    ParallelFor(fresh.size(), cfg.threads, [&](std::size_t i) {
      ++acc_calls;
      double s;
      try {
        s = AccuracyScore(model, m_r, *fresh[i], data, cfg.accuracy, acc_seed);
      } catch (const NumericalError& e) {
        // A degenerate Jacobian (e.g. a blanked-out batch) cannot pass.
        spdlog::warn("search: {} filtered: {}", fresh[i]->Notation(), e.what());
        s = -std::numeric_limits<double>::infinity();
      }
      cache.at(fresh[i]->origin).s_acc = s;  // entries exist; no rehash
    });
    std::vector<const Policy*> to_rate;
    for (const Policy* p : fresh) {
      if (Passes(cache.at(p->origin).s_acc, cfg)) to_rate.push_back(p);
    }
    ParallelFor(to_rate.size(), cfg.threads, [&](std::size_t i) {
      ++pri_calls;
      const double s = PrivacyScore(model, m_s, *to_rate[i], privacy_data, cfg.privacy, pri_seed);
      cache.at(to_rate[i]->origin).s_pri = s;
    });

    // Sequential merge in draw order.
    for (std::size_t d = begin; d < end && !done; ++d) {
      const Policy& p = drawn[d - begin];
      const Scores& s = cache.at(p.origin);
      SearchRecord rec{d, p, s.s_acc, {}, Passes(s.s_acc, cfg)};
      if (rec.accepted) {
        rec.s_pri = s.s_pri;
        const bool repeat = std::any_of(result.records.begin(), result.records.end(),
                                        [&](const SearchRecord& r) { return r.policy == p; });
        if (!repeat) {
          ++accepted_distinct;
          const ScoredPolicy sp{p, s.s_acc, *s.s_pri, d};
          auto pos = std::upper_bound(kept.begin(), kept.end(), sp,
                                      [](const ScoredPolicy& a, const ScoredPolicy& b) {
                                        return a.s_pri < b.s_pri;
                                      });
          kept.insert(pos, sp);
          if (kept.size() > cfg.n) kept.pop_back();
        }
      }
      result.records.push_back(std::move(rec));
      result.draws = d + 1;
      done = result.draws >= cfg.c_max && accepted_distinct >= cfg.n;
    }
  }
  result.accuracy_evaluations = acc_calls;
  result.privacy_evaluations = pri_calls;

  if (!done) {
    throw Error(fmt::format(
        "search: only {} of {} policies passed t_acc = {} after {} draws "
        "(acceptance rate {:.4f})",
        accepted_distinct, cfg.n, cfg.t_acc, result.draws,
        static_cast<double>(std::count_if(result.records.begin(), result.records.end(),
                                          [](const SearchRecord& r) { return r.accepted; })) /
            static_cast<double>(result.draws)));
  }

  const PolicySet hybrid = AssembleHybrid(kept, cfg.hybrid_size, cfg.strictness);
  result.policies.policies = kept;
  for (const ScoredPolicy& sp : kept) {
    result.policies.hybrid_eligible.push_back(
        std::any_of(hybrid.policies.begin(), hybrid.policies.end(),
                    [&](const ScoredPolicy& h) { return h.draw == sp.draw; }));
  }
  spdlog::info("search: {} draws, {} accuracy and {} privacy evaluations, best {} ({:.4f})",
               result.draws, result.accuracy_evaluations, result.privacy_evaluations,
               kept.front().policy.Notation(), kept.front().s_pri);
  return result;
}

std::string SearchReportCsv(const SearchResult& result) {
  std::string out = "draw,policy,s_acc,s_pri,accepted\n";
  for (const SearchRecord& r : result.records) {
    out += fmt::format("{},{},{:.17g},{},{}\n", r.draw, r.policy.Notation(), r.s_acc,
                       r.s_pri ? fmt::format("{:.17g}", *r.s_pri) : std::string(),
                       r.accepted ? 1 : 0);
  }
  return out;
}

}  // namespace ats
