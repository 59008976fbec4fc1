// Copyright 2026 The mwpgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mwpgen.h"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(mwpgen_status s) {
  if (s == MWPGEN_OK) return kExitOk;
  if (s == MWPGEN_ERR_NUMERIC) return kExitNumeric;
  if (s == MWPGEN_ERR_INTERNAL) return kExitInternal;
  return kExitInput;
}

/// Owns a string returned by the library.
class LibString {
 public:
  LibString() = default;
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  ~LibString() { mwpgen_string_free(p_); }
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

void check(mwpgen_status s) {
  if (s != MWPGEN_OK) {
    throw Failure{exit_code_for(s), mwpgen_last_error()};
  }
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitInput, "IoError: cannot read config " + path};
  try {
    return ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw Failure{kExitInput, "ConfigError: " + path + ": " + e.what()};
  }
}

/// Layers a config: defaults < file < MWPGEN_SEED (seeds only, when the file
/// has none) < flags.
class ConfigBuilder {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    doc_ = read_json_file(path);
    if (!doc_.is_object()) throw Failure{kExitInput, "ConfigError: " + path + " must hold a JSON object"};
  }

  template <typename T>
  void set(const char* section, const char* key, const std::optional<T>& value) {
    if (value) doc_[section][key] = *value;
  }

  void seed_fallback(const char* section) {
    const char* env = std::getenv("MWPGEN_SEED");
    if (env == nullptr || *env == '\0') return;
    if (doc_.contains(section) && doc_[section].contains("seed")) return;
    doc_[section]["seed"] = parse_seed(env, "MWPGEN_SEED");
  }

  /// Fills defaults and validates through the library.
  ordered_json normalized() const {
    LibString out;
    check(mwpgen_config_normalize(doc_.dump().c_str(), out.out()));
    return ordered_json::parse(out.str());
  }

  static std::uint64_t parse_seed(const std::string& s, const std::string& what) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Failure{kExitInput, "ConfigError: " + what + " is not an unsigned integer: '" + s + "'"};
  }

 private:
  ordered_json doc_ = ordered_json::object();
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(prec);
  ss << v;
  return ss.str();
}

/// Mirrors one JSON log record as aligned columns on stderr.
void human_log(const ordered_json& j) {
  const std::string ev = j.value("event", "");
  char line[256];
  if (ev == "step") {
    std::snprintf(line, sizeof line, "step %6ld  loss %9.4f  nll %9.4f  kl %8.4f  klw %6.4f  acc %6.4f  lr %.2e",
                  j.value("step", 0L), j.value("loss", 0.0), j.value("nll", 0.0), j.value("kl", 0.0),
                  j.value("kl_weight", 0.0), j.value("accuracy", 0.0), j.value("lr", 0.0));
  } else if (ev == "eval") {
    std::snprintf(line, sizeof line, "eval %6ld  %-5s  nll %9.4f  kl %8.4f  acc %6.4f  %s", j.value("step", 0L),
                  j.value("split", "").c_str(), j.value("nll", 0.0), j.value("kl", 0.0), j.value("accuracy", 0.0),
                  j.value("best", false) ? "best" : "");
  } else if (ev == "warning") {
    std::snprintf(line, sizeof line, "warning: %s", j.value("message", "").c_str());
  } else {
    std::cerr << j.dump() << "\n";
    return;
  }
  std::cerr << line << "\n";
}

struct TrainLog {
  std::ofstream file;
  bool quiet = false;
};

void on_log(const char* line, void* user) {
  auto* log = static_cast<TrainLog*>(user);
  if (log->file) log->file << line << "\n" << std::flush;
  std::cout << line << "\n" << std::flush;
  if (!log->quiet) human_log(ordered_json::parse(line));
}

struct SynthArgs {
  std::string config;
  std::optional<std::string> data_dir, templates, cskg;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  ConfigBuilder b;
  b.load(a.config);
  b.seed_fallback("synth");
  b.set("paths", "data_dir", a.data_dir);
  b.set("paths", "templates", a.templates);
  b.set("paths", "cskg", a.cskg);
  b.set("synth", "count", a.count);
  b.set("synth", "seed", a.seed);
  LibString out;
  check(mwpgen_synth(b.normalized().dump().c_str(), out.out()));
  std::cout << ordered_json::parse(out.str()).dump(2) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::optional<std::string> data_dir, cskg, checkpoint;
  std::optional<long> max_steps;
  std::optional<int> batch;
  std::optional<double> lr, teacher_forcing;
  std::optional<std::uint64_t> seed;
  std::string log_path;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  ConfigBuilder b;
  b.load(a.config);
  b.seed_fallback("train");
  b.set("paths", "data_dir", a.data_dir);
  b.set("paths", "cskg", a.cskg);
  b.set("paths", "checkpoint", a.checkpoint);
  b.set("train", "max_steps", a.max_steps);
  b.set("train", "batch", a.batch);
  b.set("train", "lr", a.lr);
  b.set("train", "teacher_forcing", a.teacher_forcing);
  b.set("train", "seed", a.seed);
  const ordered_json config = b.normalized();

  TrainLog log;
  log.quiet = a.quiet;
  if (!a.log_path.empty()) {
    log.file.open(a.log_path);
    if (!log.file) throw Failure{kExitInput, "IoError: cannot write " + a.log_path};
  }
  LibString out;
  check(mwpgen_train(config.dump().c_str(), on_log, &log, out.out()));
  ordered_json done = {{"event", "done"}};
  const ordered_json summary = ordered_json::parse(out.str());
  for (const auto& [k, v] : summary.items()) done[k] = v;
  on_log(done.dump().c_str(), &log);
  return kExitOk;
}

struct GenerateArgs {
  std::string config;
  std::string model, equations, topic, bind_x, bind_y;
  std::optional<int> samples, beam, max_len;
  std::optional<std::uint64_t> seed;
  std::string sidecar;
};

int run_generate(const GenerateArgs& a) {
  ConfigBuilder b;
  b.load(a.config);
  b.set("decode", "samples", a.samples);
  b.set("decode", "beam", a.beam);
  b.set("decode", "max_len", a.max_len);
  const ordered_json config = b.normalized();
  std::uint64_t seed = 1;
  if (a.seed) {
    seed = *a.seed;
  } else if (const char* env = std::getenv("MWPGEN_SEED"); env != nullptr && *env != '\0') {
    seed = ConfigBuilder::parse_seed(env, "MWPGEN_SEED");
  }
  const auto& d = config.at("decode");

  mwpgen_model* model = nullptr;
  check(mwpgen_model_load(a.model.c_str(), &model));
  std::unique_ptr<mwpgen_model, void (*)(mwpgen_model*)> guard(model, mwpgen_model_free);
  LibString out;
  check(mwpgen_generate(model, a.equations.c_str(), a.topic.c_str(), a.bind_x.c_str(), a.bind_y.c_str(),
                        d.at("samples").get<int>(), seed, d.at("beam").get<int>(), d.at("max_len").get<int>(),
                        out.out()));
  const ordered_json result = ordered_json::parse(out.str());
  for (const auto& o : result.at("outputs")) std::cout << o.at("text").get<std::string>() << "\n";
  if (!a.sidecar.empty()) {
    std::ofstream side(a.sidecar);
    if (!side) throw Failure{kExitInput, "IoError: cannot write " + a.sidecar};
    side << result.dump(2) << "\n";
  }
  return kExitOk;
}

struct EvalArgs {
  std::string predictions, references;
  bool json = false;
};

int run_eval(const EvalArgs& a) {
  LibString out;
  check(mwpgen_evaluate(a.predictions.c_str(), a.references.c_str(), out.out()));
  const ordered_json report = ordered_json::parse(out.str());
  if (a.json) {
    std::cout << report.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "inputs     " << report.at("inputs").get<long>() << "\n";
  std::cout << "BLEU-4     " << fmt(report.at("bleu4").get<double>()) << "\n";
  std::cout << "ROUGE-L    " << fmt(report.at("rouge_l").get<double>()) << "\n";
  std::cout << "Self-BLEU  "
            << (report.at("self_bleu").is_null() ? std::string("n/a (needs 4 samples per input)")
                                                 : fmt(report.at("self_bleu").get<double>()))
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate math word problems from equations and a topic"};
  app.set_version_flag("--version", std::string(mwpgen_version()));
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with train/dev/test splits");
  synth->add_option("-c,--config", sa.config, "JSON config file");
  synth->add_option("--data-dir", sa.data_dir, "Output directory for the .jsonl splits");
  synth->add_option("--templates", sa.templates, "Template bank (.jsonl)");
  synth->add_option("--cskg", sa.cskg, "Commonsense knowledge graph (.tsv)");
  synth->add_option("--count", sa.count, "Number of samples");
  synth->add_option("--seed", sa.seed, "Sampling seed (falls back to MWPGEN_SEED)");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model on a synthetic dataset");
  train->add_option("-c,--config", ta.config, "JSON config file");
  train->add_option("--data-dir", ta.data_dir, "Directory holding train.jsonl and dev.jsonl");
  train->add_option("--cskg", ta.cskg, "Commonsense knowledge graph (.tsv)");
  train->add_option("-o,--out,--checkpoint", ta.checkpoint, "Checkpoint directory (last/ and best/)");
  train->add_option("--max-steps", ta.max_steps, "Training steps");
  train->add_option("--batch", ta.batch, "Batch size");
  train->add_option("--lr", ta.lr, "Adam learning rate");
  train->add_option("--teacher-forcing", ta.teacher_forcing, "Probability of feeding the gold token");
  train->add_option("--seed", ta.seed, "Training seed (falls back to MWPGEN_SEED)");
  train->add_option("--log", ta.log_path, "Also write JSON log lines to this file");
  train->add_flag("-q,--quiet", ta.quiet, "No human-readable progress on stderr");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Generate problems for a system of equations");
  generate->add_option("-c,--config", ga.config, "JSON config file (decode section)");
  generate->add_option("-m,--model", ga.model, "Model directory or training checkpoint directory")->required();
  generate->add_option("-e,--equations", ga.equations, "System such as \"x+y=27; 2x+4y=86\"")->required();
  generate->add_option("-t,--topic", ga.topic, "Topic node in the knowledge graph")->required();
  generate->add_option("-x,--bind-x", ga.bind_x, "Entity for x")->required();
  generate->add_option("-y,--bind-y", ga.bind_y, "Entity for y")->required();
  generate->add_option("-n,--samples", ga.samples, "Number of problems (distinct prior draws)");
  generate->add_option("--seed", ga.seed, "Sampling seed (falls back to MWPGEN_SEED, then 1)");
  generate->add_option("--beam", ga.beam, "Beam width");
  generate->add_option("--max-len", ga.max_len, "Maximum output length in subword tokens");
  generate->add_option("--sidecar", ga.sidecar, "Write scores and the solution as JSON to this file");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("predictions", ea.predictions, "Predictions .jsonl (\"text\" or \"samples\" per line)")->required();
  eval->add_option("references", ea.references, "References .jsonl (\"text\" or \"references\" per line)")->required();
  eval->add_flag("--json", ea.json, "Print the full report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (synth->parsed()) return run_synth(sa);
    if (train->parsed()) return run_train(ta);
    if (generate->parsed()) return run_generate(ga);
    if (eval->parsed()) return run_eval(ea);
  } catch (const Failure& f) {
    std::cerr << "mwpgen: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "mwpgen: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
