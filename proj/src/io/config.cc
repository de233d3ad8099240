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

#include "ats/config.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>

#include "fmt/format.h"
#include "json.hpp"

namespace ats {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects the ones never read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(fmt::format("config: {} must be an object", Where()));
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void Read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(fmt::format("config: {}.{} has the wrong type", Where(), key));
    }
  }

  std::string String(const std::string& key, std::string fallback) {
    Read(key, fallback);
    return fallback;
  }

  Section Child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) {
        throw Error(fmt::format("config: unknown key '{}{}'", path_.empty() ? "" : path_ + ".",
                                key));
      }
    }
  }

 private:
  std::string Where() const { return path_.empty() ? "the document" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename T, typename ParseFn>
T ParseEnum(const std::string& where, const std::string& text, ParseFn parse) {
  const auto v = parse(text);
  if (!v) throw Error(fmt::format("config: {} has unknown value '{}'", where, text));
  return *v;
}

std::optional<Activation> ParseActivation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  return std::nullopt;
}

std::string_view ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "sigmoid";
}

std::optional<LabelMode> ParseLabelMode(std::string_view s) {
  if (s == "known") return LabelMode::kKnown;
  if (s == "optimize") return LabelMode::kOptimizeSoft;
  return std::nullopt;
}

std::string_view LabelModeName(LabelMode m) {
  return m == LabelMode::kKnown ? "known" : "optimize";
}

double ReadThreshold(Section& s, const std::string& key, double fallback) {
  if (!s.Has(key)) return fallback;
  json raw;
  s.Read(key, raw);
  if (raw.is_null()) return -std::numeric_limits<double>::infinity();
  if (!raw.is_number()) throw Error(fmt::format("config: search.{} must be a number or null", key));
  return raw.get<double>();
}

void ParseModel(Section s, ModelConfig& m) {
  m.architecture = ParseEnum<Architecture>(
      "model.architecture", s.String("architecture", std::string(ArchitectureName(m.architecture))),
      ParseArchitecture);
  s.Read("widths", m.widths);
  s.Read("channels", m.channels);
  s.Read("fc_width", m.fc_width);
  s.Read("blocks", m.blocks);
  std::vector<std::size_t> input = {m.input.channels, m.input.height, m.input.width};
  s.Read("input", input);
  if (input.size() != 3) throw Error("config: model.input must be [channels, height, width]");
  m.input = {input[0], input[1], input[2]};
  s.Read("classes", m.classes);
  m.activation = ParseEnum<Activation>(
      "model.activation", s.String("activation", std::string(ActivationName(m.activation))),
      ParseActivation);
  s.Finish();
  if (m.architecture == Architecture::kConvNet && m.channels.empty()) {
    m.channels = ModelConfig::ConvNet(m.input, m.classes, m.seed).channels;
  }
}

void ParseData(Section s, DataConfig& d) {
  s.Read("train_path", d.train_path);
  s.Read("eval_path", d.eval_path);
  s.Read("eval_samples_per_class", d.eval_samples_per_class);
  if (s.Has("synthetic")) {
    Section syn = s.Child("synthetic");
    SynthSpec spec = d.synthetic.value_or(SynthSpec{});
    syn.Read("classes", spec.classes);
    syn.Read("samples_per_class", spec.samples_per_class);
    syn.Read("noise", spec.noise);
    std::vector<std::size_t> shape = {spec.shape.channels, spec.shape.height, spec.shape.width};
    syn.Read("shape", shape);
    if (shape.size() != 3) throw Error("config: data.synthetic.shape must be [c, h, w]");
    spec.shape = {shape[0], shape[1], shape[2]};
    if (syn.Has("seed")) {
      std::uint64_t seed = 0;
      syn.Read("seed", seed);
      d.seed = seed;
    }
    syn.Finish();
    d.synthetic = spec;
  }
  s.Finish();
  if (d.synthetic && !d.train_path.empty()) {
    throw Error("config: data sets both synthetic and train_path");
  }
}

void ParseAttack(Section s, AttackConfig& a, std::size_t& targets) {
  a.optimizer = ParseEnum<OptimizerKind>(
      "attack.optimizer", s.String("optimizer", std::string(OptimizerName(a.optimizer))),
      ParseOptimizer);
  a.distance = ParseEnum<DistanceKind>(
      "attack.distance", s.String("distance", std::string(DistanceName(a.distance))),
      ParseDistance);
  // Optimizer-specific defaults first, explicit keys win.
  const AttackConfig defaults = AttackConfig::For(a.optimizer, a.distance);
  a.iterations = defaults.iterations;
  a.restarts = defaults.restarts;
  s.Read("iterations", a.iterations);
  s.Read("tv_weight", a.tv_weight);
  a.init = ParseEnum<InitKind>("attack.init", s.String("init", std::string(InitName(a.init))),
                               ParseInit);
  a.label_mode = ParseEnum<LabelMode>(
      "attack.label", s.String("label", std::string(LabelModeName(a.label_mode))),
      ParseLabelMode);
  s.Read("restarts", a.restarts);
  s.Read("learning_rate", a.learning_rate);
  s.Read("lr_decay", a.lr_decay);
  s.Read("sgd_momentum", a.sgd_momentum);
  s.Read("layer_trace_every", a.layer_trace_every);
  s.Read("targets", targets);
  s.Finish();
}

void ParseSearch(Section s, SearchConfig& c, SemiTrainOptions& semi) {
  s.Read("c_max", c.c_max);
  s.Read("n", c.n);
  s.Read("k", c.k);
  c.t_acc = ReadThreshold(s, "t_acc", c.t_acc);
  s.Read("privacy_samples", c.privacy_samples);
  s.Read("integration_steps", c.privacy.steps);
  s.Read("accuracy_batch", c.accuracy.batch);
  s.Read("accuracy_rounds", c.accuracy.rounds);
  s.Read("accuracy_learning_rate", c.accuracy.learning_rate);
  s.Read("hybrid_size", c.hybrid_size);
  c.strictness = ParseEnum<HybridStrictness>(
      "search.hybrid_strictness",
      s.String("hybrid_strictness", std::string(HybridStrictnessName(c.strictness))),
      ParseHybridStrictness);
  s.Read("threads", c.threads);
  s.Read("semi_train_fraction", semi.fraction);
  s.Read("semi_train_epochs", semi.epochs);
  s.Finish();
}

void ParseTrain(Section s, TrainConfig& t) {
  s.Read("participants", t.participants);
  s.Read("epochs", t.epochs);
  s.Read("batch_size", t.batch_size);
  s.Read("learning_rate", t.learning_rate);
  s.Read("lr_decay", t.lr_decay);
  s.Read("momentum", t.sgd.momentum);
  s.Read("weight_decay", t.sgd.weight_decay);
  s.Finish();
}

json ThresholdJson(double t) {
  if (std::isinf(t) && t < 0) return nullptr;
  return t;
}

}  // namespace

std::string_view ArchitectureName(Architecture a) {
  switch (a) {
    case Architecture::kMlp: return "mlp";
    case Architecture::kConvNet: return "convnet";
    case Architecture::kSmallResNet: return "smallresnet";
  }
  return "?";
}

std::optional<Architecture> ParseArchitecture(std::string_view name) {
  for (Architecture a : {Architecture::kMlp, Architecture::kConvNet, Architecture::kSmallResNet}) {
    if (ArchitectureName(a) == name) return a;
  }
  return std::nullopt;
}

void ApplySeed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.model.seed = DeriveSeed(seed, {1});
  if (cfg.data.synthetic) cfg.data.synthetic->seed = cfg.data.seed.value_or(DeriveSeed(seed, {2}));
  cfg.attack.seed = DeriveSeed(seed, {3});
  cfg.search.seed = DeriveSeed(seed, {4});
  cfg.train.seed = DeriveSeed(seed, {5});
  if (cfg.defense) cfg.defense->seed = DeriveSeed(seed, {6});
}

ExperimentConfig ParseConfig(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(fmt::format("config: invalid JSON: {}", e.what()));
  }
  Section root(doc, "");
  if (!root.Has("seed")) throw Error("config: missing mandatory key 'seed'");
  ExperimentConfig cfg;
  // The desk-scale model unless the document says otherwise.
  cfg.model = ModelConfig::ConvNet(ImageShape{1, 8, 8}, 10, 0);
  std::uint64_t seed = 0;
  root.Read("seed", seed);
  root.Read("output_dir", cfg.output_dir);
  if (root.Has("model")) ParseModel(root.Child("model"), cfg.model);
  if (root.Has("data")) ParseData(root.Child("data"), cfg.data);
  if (root.Has("attack")) ParseAttack(root.Child("attack"), cfg.attack, cfg.attack_targets);
  if (root.Has("search")) ParseSearch(root.Child("search"), cfg.search, cfg.semi_train);
  if (root.Has("train")) ParseTrain(root.Child("train"), cfg.train);
  if (root.Has("defense")) {
    std::string text;
    root.Read("defense", text);
    if (!text.empty() && text != "none") cfg.defense = ParseDefense(text);
  }
  root.Finish();
  if (!cfg.data.synthetic && cfg.data.train_path.empty()) cfg.data.synthetic = SynthSpec{};
  ApplySeed(cfg, seed);

  cfg.model.Validate();
  cfg.attack.Validate();
  cfg.search.Validate();
  cfg.train.Validate();
  if (cfg.data.synthetic) cfg.data.synthetic->Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("config: cannot open '{}'", path.string()));
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
  }();
  return ParseConfig(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string ConfigToJson(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  const ModelConfig& m = cfg.model;
  j["model"] = {{"architecture", ArchitectureName(m.architecture)},
                {"widths", m.widths},
                {"channels", m.channels},
                {"fc_width", m.fc_width},
                {"blocks", m.blocks},
                {"input", {m.input.channels, m.input.height, m.input.width}},
                {"classes", m.classes},
                {"activation", ActivationName(m.activation)}};
  json data = {{"eval_samples_per_class", cfg.data.eval_samples_per_class}};
  if (!cfg.data.train_path.empty()) data["train_path"] = cfg.data.train_path;
  if (!cfg.data.eval_path.empty()) data["eval_path"] = cfg.data.eval_path;
  if (cfg.data.synthetic) {
    const SynthSpec& s = *cfg.data.synthetic;
    data["synthetic"] = {{"classes", s.classes},
                         {"samples_per_class", s.samples_per_class},
                         {"noise", s.noise},
                         {"shape", {s.shape.channels, s.shape.height, s.shape.width}}};
    if (cfg.data.seed) data["synthetic"]["seed"] = *cfg.data.seed;
  }
  j["data"] = data;
  const AttackConfig& a = cfg.attack;
  j["attack"] = {{"optimizer", OptimizerName(a.optimizer)},
                 {"distance", DistanceName(a.distance)},
                 {"iterations", a.iterations},
                 {"tv_weight", a.tv_weight},
                 {"init", InitName(a.init)},
                 {"label", LabelModeName(a.label_mode)},
                 {"restarts", a.restarts},
                 {"learning_rate", a.learning_rate},
                 {"lr_decay", a.lr_decay},
                 {"sgd_momentum", a.sgd_momentum},
                 {"layer_trace_every", a.layer_trace_every},
                 {"targets", cfg.attack_targets}};
  const SearchConfig& s = cfg.search;
  j["search"] = {{"c_max", s.c_max},
                 {"n", s.n},
                 {"k", s.k},
                 {"t_acc", ThresholdJson(s.t_acc)},
                 {"privacy_samples", s.privacy_samples},
                 {"integration_steps", s.privacy.steps},
                 {"accuracy_batch", s.accuracy.batch},
                 {"accuracy_rounds", s.accuracy.rounds},
                 {"accuracy_learning_rate", s.accuracy.learning_rate},
                 {"hybrid_size", s.hybrid_size},
                 {"hybrid_strictness", HybridStrictnessName(s.strictness)},
                 {"threads", s.threads},
                 {"semi_train_fraction", cfg.semi_train.fraction},
                 {"semi_train_epochs", cfg.semi_train.epochs}};
  const TrainConfig& t = cfg.train;
  j["train"] = {{"participants", t.participants},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"lr_decay", t.lr_decay},
                {"momentum", t.sgd.momentum},
                {"weight_decay", t.sgd.weight_decay}};
  j["defense"] = cfg.defense ? cfg.defense->ToString() : std::string("none");
  return j.dump(2) + "\n";
}

std::filesystem::path ReportRoot(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("ATS_REPORT_ROOT"); env && *env) return env;
  return cfg.output_dir;
}

}  // namespace ats
