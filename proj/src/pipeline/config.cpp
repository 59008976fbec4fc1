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

#include "mwpgen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mwpgen/error.hpp"

namespace mwpgen {

using nlohmann::ordered_json;

namespace {

/// Reads the known keys of one section and rejects the rest.
class Section {
 public:
  Section(const ordered_json& root, const char* name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    require(node_->is_object(), ErrorCode::kConfig, std::string("section '") + name + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const std::exception&) {
      fail(ErrorCode::kConfig, name_ + "." + key + " has the wrong type");
    }
  }

  void path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void done() const {
    if (node_ == nullptr) return;
    for (const auto& [k, v] : node_->items()) {
      require(known_.count(k) != 0, ErrorCode::kConfig, "unknown config key " + name_ + "." + k);
    }
  }

 private:
  std::string name_;
  const ordered_json* node_ = nullptr;
  std::set<std::string> known_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  require(root.is_object(), ErrorCode::kConfig, "config must be a JSON object");
  for (const auto& [k, v] : root.items()) {
    static const std::set<std::string> sections{"paths", "model", "train", "decode", "synth"};
    require(sections.count(k) != 0, ErrorCode::kConfig, "unknown config section '" + k + "'");
  }
  RunConfig c;
  {
    Section s(root, "paths");
    s.path("data_dir", c.paths.data_dir);
    s.path("cskg", c.paths.cskg);
    s.path("templates", c.paths.templates);
    s.path("checkpoint", c.paths.checkpoint);
    s.done();
  }
  {
    Section s(root, "model");
    s.get("embedding", c.model.embedding);
    s.get("hidden", c.model.hidden);
    s.get("latent", c.model.latent);
    s.get("hops", c.model.hops);
    s.get("share_encoders", c.model.share_encoders);
    s.get("init_std", c.model.init_std);
    s.done();
  }
  {
    Section s(root, "train");
    auto& l = c.train.loop;
    s.get("batch", l.batch);
    s.get("teacher_forcing", l.teacher_forcing);
    s.get("kl_ramp_fraction", l.kl_ramp_fraction);
    s.get("kl_weight_max", l.kl_weight_max);
    s.get("lr", l.lr);
    s.get("max_steps", l.max_steps);
    s.get("seed", l.seed);
    s.get("eval_every", l.eval_every);
    s.get("patience", l.patience);
    s.get("clip_norm", l.clip_norm);
    s.get("bpe_merges", c.train.bpe_merges);
    s.get("max_len", c.train.max_len);
    s.done();
  }
  {
    Section s(root, "decode");
    s.get("beam", c.decode.beam);
    s.get("max_len", c.decode.max_len);
    s.get("samples", c.decode.samples);
    s.done();
  }
  {
    Section s(root, "synth");
    s.get("count", c.synth.count);
    s.get("dev_fraction", c.synth.dev_fraction);
    s.get("test_fraction", c.synth.test_fraction);
    s.get("seed", c.synth.seed);
    s.get("coef_min", c.synth.options.coef_min);
    s.get("coef_max", c.synth.options.coef_max);
    s.get("solution_min", c.synth.options.solution_min);
    s.get("solution_max", c.synth.options.solution_max);
    s.get("shapes", c.synth.options.shapes);
    s.get("topics", c.synth.options.topics);
    s.get("all_variants", c.synth.options.all_variants);
    s.done();
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  const auto& l = c.train.loop;
  const auto& o = c.synth.options;
  ordered_json j = {
      {"paths",
       {{"data_dir", c.paths.data_dir.string()},
        {"cskg", c.paths.cskg.string()},
        {"templates", c.paths.templates.string()},
        {"checkpoint", c.paths.checkpoint.string()}}},
      {"model",
       {{"embedding", c.model.embedding},
        {"hidden", c.model.hidden},
        {"latent", c.model.latent},
        {"hops", c.model.hops},
        {"share_encoders", c.model.share_encoders},
        {"init_std", c.model.init_std}}},
      {"train",
       {{"batch", l.batch},
        {"teacher_forcing", l.teacher_forcing},
        {"kl_ramp_fraction", l.kl_ramp_fraction},
        {"kl_weight_max", l.kl_weight_max},
        {"lr", l.lr},
        {"max_steps", l.max_steps},
        {"seed", l.seed},
        {"eval_every", l.eval_every},
        {"patience", l.patience},
        {"clip_norm", l.clip_norm},
        {"bpe_merges", c.train.bpe_merges},
        {"max_len", c.train.max_len}}},
      {"decode", {{"beam", c.decode.beam}, {"max_len", c.decode.max_len}, {"samples", c.decode.samples}}},
      {"synth",
       {{"count", c.synth.count},
        {"dev_fraction", c.synth.dev_fraction},
        {"test_fraction", c.synth.test_fraction},
        {"seed", c.synth.seed},
        {"coef_min", o.coef_min},
        {"coef_max", o.coef_max},
        {"solution_min", o.solution_min},
        {"solution_max", o.solution_max},
        {"shapes", o.shapes},
        {"topics", o.topics},
        {"all_variants", o.all_variants}}}};
  return j.dump(2);
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kConfig, what); };
  check(c.model.embedding > 0 && c.model.hidden > 0 && c.model.latent > 0, "model dimensions must be positive");
  check(c.model.hops >= 0, "model.hops must be non-negative");
  check(c.model.init_std > 0, "model.init_std must be positive");
  const auto& l = c.train.loop;
  check(l.batch > 0, "train.batch must be positive");
  check(l.teacher_forcing >= 0 && l.teacher_forcing <= 1, "train.teacher_forcing must lie in [0, 1]");
  check(l.kl_ramp_fraction >= 0 && l.kl_ramp_fraction <= 1, "train.kl_ramp_fraction must lie in [0, 1]");
  check(l.kl_weight_max >= 0, "train.kl_weight_max must be non-negative");
  check(l.lr > 0, "train.lr must be positive");
  check(l.max_steps >= 0, "train.max_steps must be non-negative");
  check(l.eval_every > 0 && l.patience > 0, "train.eval_every and train.patience must be positive");
  check(l.clip_norm > 0, "train.clip_norm must be positive");
  check(c.train.bpe_merges >= 0 && c.train.max_len > 0, "train.bpe_merges and train.max_len out of range");
  check(c.decode.beam > 0 && c.decode.max_len > 0 && c.decode.samples > 0, "decode settings must be positive");
  check(c.synth.count > 0, "synth.count must be positive");
  check(c.synth.dev_fraction >= 0 && c.synth.test_fraction >= 0 &&
            c.synth.dev_fraction + c.synth.test_fraction < 1,
        "synth fractions must be non-negative and sum below 1");
  const auto& o = c.synth.options;
  check(o.coef_min >= 1 && o.coef_min <= o.coef_max, "synth coefficient range is empty");
  check(o.solution_min >= 1 && o.solution_min <= o.solution_max, "synth solution range is empty");
}

}  // namespace mwpgen
