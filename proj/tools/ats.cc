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


// Command-line front end: attack, search, score-policy, transform, train,
// baseline and correlate. Every command writes a report directory holding a
// snapshot of the effective configuration, CSV tables and, where images are
// involved, PNG side-by-sides.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ats/attack.h"
#include "ats/config.h"
#include "ats/dataset.h"
#include "ats/defense.h"
#include "ats/experiment.h"
#include "ats/fedsim.h"
#include "ats/hybrid.h"
#include "ats/io.h"
#include "ats/metrics.h"
#include "ats/nn.h"
#include "ats/random.h"
#include "ats/scores.h"
#include "ats/search.h"
#include "ats/transforms.h"
#include "fmt/format.h"
#include "spdlog/spdlog.h"

namespace ats {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string log_level = "info";
  std::vector<std::string> policies;
  std::string defense;
  std::string params;
  std::string image;
  std::optional<std::size_t> index;
  std::size_t correlate_policies = 30;
  bool train = false;
};

struct Context {
  explicit Context(ExperimentConfig config) : cfg(std::move(config)), model(cfg.model) {}

  ExperimentConfig cfg;
  fs::path dir;
  Model model;
};

Context Prepare(const Options& o, const std::string& command) {
  ExperimentConfig cfg = LoadConfig(o.config);
  if (o.seed) ApplySeed(cfg, *o.seed);
  Context ctx(std::move(cfg));
  ctx.dir = o.out.empty() ? ReportRoot(ctx.cfg) / command : fs::path(o.out);
  fs::create_directories(ctx.dir);
  WriteFile(ctx.dir / "config.json", ConfigToJson(ctx.cfg));
  return ctx;
}

std::optional<PolicySet> Policies(const Options& o) {
  if (o.policies.empty()) return std::nullopt;
  std::vector<Policy> list;
  for (const std::string& p : o.policies) list.push_back(ParsePolicy(p, PolicyTable::Default()));
  return PolicySet::Of(std::move(list));
}

std::optional<DefenseSpec> Defense(const Options& o, const ExperimentConfig& cfg) {
  if (!o.defense.empty()) {
    if (o.defense == "none") return std::nullopt;
    DefenseSpec spec = ParseDefense(o.defense);
    spec.seed = cfg.defense ? cfg.defense->seed : DeriveSeed(cfg.seed, {6});
    return spec;
  }
  return cfg.defense;
}

ModelParams VictimParams(const Options& o, const Context& ctx) {
  const ModelParams init = ctx.model.Init();
  return o.params.empty() ? init : LoadParams(init, o.params);
}

std::string PolicyLabel(const PolicySet* set, std::uint64_t seed) {
  if (!set || set->size() == 0) return "none";
  return set->policies[HybridChoice(*set, DeriveSeed(seed, {0x7F}))].policy.Notation();
}

// Attacks cfg.attack_targets samples; shared by attack and baseline.
struct AttackSummary {
  Csv table{{"target", "sample", "label", "policy", "defense", "psnr", "objective", "distance"}};
  std::vector<double> psnr;
};

AttackSummary AttackTargets(const Context& ctx, const ModelParams& params, const Dataset& data,
                            const PolicySet* set, const std::optional<DefenseSpec>& defense) {
  AttackSummary s;
  const auto targets = TargetIndices(data, ctx.cfg.attack_targets, ctx.cfg.attack.seed);
  const std::string defense_name = defense ? defense->ToString() : "none";
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::uint64_t seed = DeriveSeed(ctx.cfg.attack.seed, {t});
    const AttackTrial trial = RunAttackTrial(ctx.model, params, data, targets[t], set, defense,
                                             ctx.cfg.attack, seed);
    s.psnr.push_back(trial.psnr);
    s.table.Row({std::to_string(t), std::to_string(trial.index), std::to_string(trial.label),
                 PolicyLabel(set, seed), defense_name, CsvNumber(trial.psnr),
                 CsvNumber(trial.result.objective), CsvNumber(trial.result.distance)});

    Csv trace({"iteration", "objective", "psnr"});
    for (const TracePoint& p : trial.result.trace) {
      trace.Row({std::to_string(p.iteration), CsvNumber(p.objective),
                 p.psnr ? CsvNumber(*p.psnr) : ""});
    }
    trace.Save(ctx.dir / fmt::format("trace_{}.csv", t));
    const LayerTrace& lt = trial.result.layer_trace;
    if (!lt.iterations.empty()) {
      Csv layers({"iteration", "layer", "similarity"});
      for (std::size_t i = 0; i < lt.iterations.size(); ++i)
        for (std::size_t l = 0; l < lt.layers.size(); ++l) {
          const auto& v = lt.similarity[i][l];
          layers.Row({std::to_string(lt.iterations[i]), lt.layers[l], v ? CsvNumber(*v) : ""});
        }
      layers.Save(ctx.dir / fmt::format("layers_{}.csv", t));
    }
    const std::vector<Tensor> row{trial.original, trial.transformed, trial.result.reconstruction};
    SaveImage(SideBySide(row), ctx.dir / fmt::format("side_by_side_{}.png", t));
    spdlog::info("target {} (sample {}): psnr {:.2f} dB", t, trial.index, trial.psnr);
  }
  return s;
}

double MeanOf(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

void RunAttack(const Options& o) {
  Context ctx = Prepare(o, "attack");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  const auto set = Policies(o);
  const AttackSummary s = AttackTargets(ctx, VictimParams(o, ctx), data.train,
                                        set ? &*set : nullptr, Defense(o, ctx.cfg));
  s.table.Save(ctx.dir / "attack.csv");
  std::printf("mean psnr %.2f dB over %zu targets\n", MeanOf(s.psnr), s.psnr.size());
}

void RunBaseline(const Options& o) {
  Context ctx = Prepare(o, "baseline");
  const auto defense = Defense(o, ctx.cfg);
  if (!defense) throw Error("baseline: no defense given (--defense or config defense)");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  const AttackSummary s = AttackTargets(ctx, VictimParams(o, ctx), data.train, nullptr, defense);
  s.table.Save(ctx.dir / "baseline.csv");
  Csv summary({"defense", "mean_psnr", "eval_accuracy"});
  std::string accuracy;
  if (o.train) {
    TrainConfig train = ctx.cfg.train;
    train.defense = defense;
    const TrainingResult r =
        RunTraining(ctx.model, ctx.model.Init(), train, data.train, data.eval);
    accuracy = CsvNumber(r.accuracy.back());
  }
  summary.Row({defense->ToString(), CsvNumber(MeanOf(s.psnr)), accuracy});
  summary.Save(ctx.dir / "summary.csv");
  std::printf("%s: mean psnr %.2f dB%s\n", defense->ToString().c_str(), MeanOf(s.psnr),
              accuracy.empty() ? "" : fmt::format(", eval accuracy {}", accuracy).c_str());
}

void RunTrain(const Options& o) {
  Context ctx = Prepare(o, "train");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  TrainConfig train = ctx.cfg.train;
  train.defense = Defense(o, ctx.cfg);
  train.policies = Policies(o);
  const TrainingResult r = RunTraining(ctx.model, ctx.model.Init(), train, data.train, data.eval);
  Csv log({"epoch", "round", "lr", "train_loss", "eval_accuracy"});
  log.Row({"0", "", "", "", CsvNumber(r.accuracy.front())});
  for (const RoundLog& round : r.rounds) {
    const std::size_t epoch = round.round / r.rounds_per_epoch + 1;
    const bool last = (round.round + 1) % r.rounds_per_epoch == 0;
    log.Row({std::to_string(epoch), std::to_string(round.round), CsvNumber(round.learning_rate),
             CsvNumber(round.train_loss), last ? CsvNumber(r.accuracy[epoch]) : ""});
  }
  log.Save(ctx.dir / "training_log.csv");
  SaveParams(r.params, ctx.dir / "model.atsr");
  std::printf("eval accuracy %.4f after %zu epochs\n", r.accuracy.back(), train.epochs);
}

void RunSearch(const Options& o) {
  Context ctx = Prepare(o, "search");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  const SearchModels models = MakeSearchModels(ctx.cfg, ctx.model, data.train);
  const SearchResult r =
      Search(ctx.cfg.search, ctx.model, models.semi_trained, models.random, data.train);
  WriteFile(ctx.dir / "search.csv", SearchReportCsv(r));
  Csv kept({"rank", "policy", "transforms", "s_acc", "s_pri", "hybrid"});
  for (std::size_t i = 0; i < r.policies.size(); ++i) {
    const ScoredPolicy& p = r.policies.policies[i];
    kept.Row({std::to_string(i), p.policy.Notation(), p.policy.Describe(), CsvNumber(p.s_acc),
              CsvNumber(p.s_pri), r.policies.hybrid_eligible[i] ? "1" : "0"});
  }
  kept.Save(ctx.dir / "policies.csv");
  std::vector<std::string> members;
  for (std::size_t i : r.policies.HybridMembers())
    members.push_back(r.policies.policies[i].policy.Notation());
  std::printf("hybrid: %s (%zu draws)\n", fmt::format("{}", fmt::join(members, " + ")).c_str(),
              r.draws);
}

void RunScorePolicy(const Options& o) {
  if (o.policies.size() != 1) throw Error("score-policy: exactly one --policy is required");
  Context ctx = Prepare(o, "score-policy");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  const Policy policy = ParsePolicy(o.policies[0], PolicyTable::Default());
  const SearchModels models = MakeSearchModels(ctx.cfg, ctx.model, data.train);
  const double s_acc =
      SearchAccuracyScore(ctx.model, models.random, policy, data.train, ctx.cfg.search);
  const double s_pri =
      SearchPrivacyScore(ctx.model, models.semi_trained, policy, data.train, ctx.cfg.search);
  Csv curves({"policy", "sample_index", "i", "gradsim"});
  const auto all = SearchPrivacyCurves(ctx.model, models.semi_trained, policy, data.train,
                                       ctx.cfg.search);
  for (std::size_t n = 0; n < all.size(); ++n) {
    if (!all[n]) continue;
    for (const GradSimPoint& p : *all[n])
      curves.Row({policy.Notation(), std::to_string(n), CsvNumber(p.i), CsvNumber(p.similarity)});
  }
  curves.Save(ctx.dir / "gradsim.csv");
  Csv scores({"policy", "s_pri", "s_acc"});
  scores.Row({policy.Notation(), CsvNumber(s_pri), CsvNumber(s_acc)});
  scores.Save(ctx.dir / "scores.csv");
  std::printf("%s %s: s_pri %.6f, s_acc %.6f\n", policy.Notation().c_str(),
              policy.Describe().c_str(), s_pri, s_acc);
}

void RunTransform(const Options& o) {
  if (o.policies.size() != 1) throw Error("transform: exactly one --policy is required");
  Context ctx = Prepare(o, "transform");
  const Policy policy = ParsePolicy(o.policies[0], PolicyTable::Default());
  Tensor image;
  if (!o.image.empty()) {
    image = LoadImage(o.image);
  } else {
    const ExperimentData data = LoadExperimentData(ctx.cfg);
    const std::size_t i = o.index.value_or(0);
    if (i >= data.train.size()) throw Error(fmt::format("transform: sample {} out of range", i));
    image = data.train.images[i];
  }
  const Tensor out = ApplyPolicy(image, policy, DeriveSeed(ctx.cfg.seed, {0x7F}));
  SaveImage(out, ctx.dir / "transformed.png");
  const std::vector<Tensor> row{image, out};
  SaveImage(SideBySide(row), ctx.dir / "side_by_side.png");
  std::printf("%s\n", policy.Describe().c_str());
}

void RunCorrelate(const Options& o) {
  Context ctx = Prepare(o, "correlate");
  if (o.correlate_policies < 3) throw Error("correlate: need at least 3 policies");
  const ExperimentData data = LoadExperimentData(ctx.cfg);
  const SearchModels models = MakeSearchModels(ctx.cfg, ctx.model, data.train);
  const ModelParams victim = VictimParams(o, ctx);
  const auto targets = TargetIndices(data.train, ctx.cfg.attack_targets, ctx.cfg.attack.seed);
  Rng rng(DeriveSeed(ctx.cfg.search.seed, {0xC0}));
  std::set<std::string> seen;
  std::vector<double> s_pri, psnr;
  Csv table({"policy", "s_pri", "psnr"});
  for (std::size_t attempts = 0; s_pri.size() < o.correlate_policies; ++attempts) {
    if (attempts > 100 * o.correlate_policies) throw Error("correlate: policy space exhausted");
    const Policy p = SamplePolicy(rng, ctx.cfg.search.k, PolicyTable::Default());
    if (!seen.insert(p.Notation()).second) continue;
    const PolicySet set = PolicySet::Of({p});
    std::vector<double> per;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      per.push_back(RunAttackTrial(ctx.model, victim, data.train, targets[t], &set, std::nullopt,
                                   ctx.cfg.attack, DeriveSeed(ctx.cfg.attack.seed, {t}))
                        .psnr);
    }
    s_pri.push_back(
        SearchPrivacyScore(ctx.model, models.semi_trained, p, data.train, ctx.cfg.search));
    psnr.push_back(MeanOf(per));
    table.Row({p.Notation(), CsvNumber(s_pri.back()), CsvNumber(psnr.back())});
    spdlog::info("{}: s_pri {:.4f}, psnr {:.2f} dB", p.Notation(), s_pri.back(), psnr.back());
  }
  table.Save(ctx.dir / "correlate.csv");
  const double r = Pearson(s_pri, psnr);
  Csv summary({"policies", "pearson_r"});
  summary.Row({std::to_string(s_pri.size()), CsvNumber(r)});
  summary.Save(ctx.dir / "summary.csv");
  std::printf("pearson r = %.4f over %zu policies\n", r, s_pri.size());
}

}  // namespace
}  // namespace ats

int main(int argc, char** argv) {
  using namespace ats;
  CLI::App app{"Privacy-preserving transformation policies for collaborative learning"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment configuration (JSON)")->required();
    sub->add_option("--seed", o.seed, "Override the root seed");
    sub->add_option("--out", o.out, "Report directory (default <output_dir>/<command>)");
    sub->add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");
  };
  auto* attack = app.add_subcommand("attack", "Reconstruct training samples from gradients");
  auto* search = app.add_subcommand("search", "Search privacy-preserving policies");
  auto* score = app.add_subcommand("score-policy", "Privacy and accuracy scores of a policy");
  auto* transform = app.add_subcommand("transform", "Apply a policy to an image");
  auto* train = app.add_subcommand("train", "Collaborative training");
  auto* baseline = app.add_subcommand("baseline", "Attack under pruning or noise defenses");
  auto* correlate = app.add_subcommand("correlate", "Privacy score against attack PSNR");
  for (CLI::App* sub : {attack, search, score, transform, train, baseline, correlate}) common(sub);
  for (CLI::App* sub : {attack, train}) {
    sub->add_option("--policy", o.policies, "Policy notation such as 3-1-7; repeat for a hybrid");
    sub->add_option("--defense", o.defense, "prune:R, gaussian:S, laplacian:S or none");
  }
  for (CLI::App* sub : {score, transform})
    sub->add_option("--policy", o.policies, "Policy notation such as 3-1-7")->required();
  baseline->add_option("--defense", o.defense, "prune:R, gaussian:S or laplacian:S");
  baseline->add_flag("--train", o.train, "Also train under the defense and report accuracy");
  for (CLI::App* sub : {attack, baseline, correlate})
    sub->add_option("--params", o.params, "Model checkpoint (default: untrained model)");
  transform->add_option("--image", o.image, "PNG to transform (default: a dataset sample)");
  transform->add_option("--index", o.index, "Dataset sample to transform");
  correlate->add_option("--policies", o.correlate_policies, "Number of random policies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  try {
    spdlog::set_level(spdlog::level::from_str(o.log_level));
    if (*attack) RunAttack(o);
    if (*search) RunSearch(o);
    if (*score) RunScorePolicy(o);
    if (*transform) RunTransform(o);
    if (*train) RunTrain(o);
    if (*baseline) RunBaseline(o);
    if (*correlate) RunCorrelate(o);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
