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

#include "mwpgen.h"

#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"
#include "mwpgen/config.hpp"
#include "mwpgen/error.hpp"
#include "mwpgen/metrics.hpp"
#include "mwpgen/pipeline.hpp"

struct mwpgen_model {
  std::unique_ptr<mwpgen::pipeline::Model> model;
};

namespace {

namespace fs = std::filesystem;
using namespace mwpgen;
using nlohmann::ordered_json;

thread_local std::string g_last_error;

mwpgen_status status_of(ErrorCode c) { return static_cast<mwpgen_status>(static_cast<int>(c) + 1); }

template <typename Fn>
mwpgen_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MWPGEN_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return MWPGEN_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  require(out != nullptr, ErrorCode::kContract, "null output pointer");
  *out = dup_string(s);
}

std::string arg(const char* s, const char* what) {
  require(s != nullptr, ErrorCode::kContract, std::string("null ") + what);
  return s;
}

RunConfig config_arg(const char* json) {
  const std::string text = json == nullptr || *json == '\0' ? "{}" : json;
  return parse_config(text);
}

std::vector<corpus::RawSample> read_optional(const fs::path& p) {
  if (!fs::exists(p)) return {};
  return corpus::read_dataset(p);
}

/// Texts of one .jsonl line: "field" as a string or "list_field" as an array.
std::vector<metrics::Tokens> read_texts(const ordered_json& j, const char* field, const char* list_field,
                                        const std::string& where) {
  std::vector<metrics::Tokens> out;
  if (j.is_object() && j.contains(list_field) && j.at(list_field).is_array()) {
    for (const auto& s : j.at(list_field)) {
      require(s.is_string(), ErrorCode::kParse, where + ": '" + list_field + "' must hold strings");
      out.push_back(metrics::tokenize(s.get<std::string>()));
    }
  } else if (j.is_object() && j.contains(field) && j.at(field).is_string()) {
    out.push_back(metrics::tokenize(j.at(field).get<std::string>()));
  } else {
    fail(ErrorCode::kParse, where + ": expected '" + field + "' or '" + list_field + "'");
  }
  return out;
}

std::vector<std::vector<metrics::Tokens>> read_text_file(const std::string& path, const char* field,
                                                         const char* list_field) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path);
  std::vector<std::vector<metrics::Tokens>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::kParse, path + ":" + std::to_string(n) + ": " + e.what());
    }
    out.push_back(read_texts(j, field, list_field, path + ":" + std::to_string(n)));
  }
  return out;
}

ordered_json solution_json(const eq::LinearSystem& sys, const eq::Solution& s) {
  return {{"x", eq::to_string(s.x)},
          {"y", eq::to_string(s.y)},
          {"positive", s.positive},
          {"integral", s.integral},
          {"shape", eq::shape_of(sys)}};
}

}  // namespace

extern "C" {

const char* mwpgen_version(void) { return "0.1.0"; }

const char* mwpgen_status_name(mwpgen_status status) {
  if (status == MWPGEN_OK) return "Ok";
  if (status == MWPGEN_ERR_INTERNAL) return "InternalError";
  if (status > MWPGEN_OK && status < MWPGEN_ERR_INTERNAL) {
    return error_code_name(static_cast<ErrorCode>(static_cast<int>(status) - 1));
  }
  return "UnknownStatus";
}

const char* mwpgen_last_error(void) { return g_last_error.c_str(); }

void mwpgen_string_free(char* s) { std::free(s); }

mwpgen_status mwpgen_config_normalize(const char* config_json, char** out_json) {
  return guarded([&] { set_out(out_json, config_to_json(config_arg(config_json))); });
}

mwpgen_status mwpgen_solve(const char* equations, char** out_json) {
  return guarded([&] {
    auto sys = eq::parse_system(arg(equations, "equations"));
    const auto sol = eq::solve_system(sys);
    set_out(out_json, solution_json(sys, sol).dump());
  });
}

mwpgen_status mwpgen_synth(const char* config_json, char** out_summary_json) {
  return guarded([&] {
    const RunConfig c = config_arg(config_json);
    const auto kg = kg::load_triples(c.paths.cskg);
    const auto templates = corpus::read_templates(c.paths.templates);
    const auto data = corpus::synth_corpus(templates, kg, c.synth.count, c.synth.seed, c.synth.options);
    const auto parts = corpus::split(data, c.synth.dev_fraction, c.synth.test_fraction, c.synth.seed);
    std::error_code ec;
    fs::create_directories(c.paths.data_dir, ec);
    require(!ec, ErrorCode::kIo, "cannot create " + c.paths.data_dir.string() + ": " + ec.message());
    corpus::write_dataset(c.paths.data_dir / "train.jsonl", parts.train);
    corpus::write_dataset(c.paths.data_dir / "dev.jsonl", parts.dev);
    corpus::write_dataset(c.paths.data_dir / "test.jsonl", parts.test);
    std::map<std::string, int> topics, shapes;
    for (const auto& s : data) {
      ++topics[s.topic];
      ++shapes[eq::shape_of(eq::parse_system(s.equations))];
    }
    ordered_json j = {{"count", data.size()},
                      {"train", parts.train.size()},
                      {"dev", parts.dev.size()},
                      {"test", parts.test.size()},
                      {"data_dir", c.paths.data_dir.string()},
                      {"topics", topics},
                      {"shapes", shapes}};
    set_out(out_summary_json, j.dump());
  });
}

mwpgen_status mwpgen_train(const char* config_json, mwpgen_log_fn log, void* user, char** out_summary_json) {
  return guarded([&] {
    const RunConfig c = config_arg(config_json);
    auto kg = kg::load_triples(c.paths.cskg);
    const auto train_raw = corpus::read_dataset(c.paths.data_dir / "train.jsonl");
    const auto dev_raw = read_optional(c.paths.data_dir / "dev.jsonl");
    auto vocab = pipeline::build_training_vocab(train_raw, kg, c.train.bpe_merges);
    auto model = pipeline::create_model(c.model, c.train.max_len, std::move(vocab), std::move(kg), c.train.loop.seed);
    pipeline::GraphCache cache(model->kg, model->vocab);
    std::vector<std::string> warnings;
    const auto train_set = pipeline::prepare_examples(train_raw, cache, model->vocab, c.train.max_len, &warnings);
    const auto dev_set = pipeline::prepare_examples(dev_raw, cache, model->vocab, c.train.max_len, &warnings);
    pipeline::LogSink sink;
    if (log != nullptr) sink = [&](const std::string& line) { log(line.c_str(), user); };
    for (const auto& w : warnings) {
      if (sink) sink(ordered_json{{"event", "warning"}, {"message", w}}.dump());
    }
    if (sink) {
      sink(ordered_json{{"event", "start"},
                        {"train", train_set.size()},
                        {"dev", dev_set.size()},
                        {"vocab", model->vocab.size()},
                        {"params", model->params.scalar_count()}}
               .dump());
    }
    const auto report = pipeline::train(*model, train_set, dev_set, c.train.loop, c.paths.checkpoint, sink);
    const auto final_stats = pipeline::evaluate_loss(*model, train_set, c.train.loop.batch);
    ordered_json j = {{"steps", report.steps},
                      {"last_nll", report.last_nll},
                      {"last_kl", report.last_kl},
                      {"train_nll", final_stats.nll},
                      {"train_kl", final_stats.kl},
                      {"train_accuracy", final_stats.accuracy},
                      {"lr", report.lr},
                      {"checkpoint", c.paths.checkpoint.string()}};
    set_out(out_summary_json, j.dump());
  });
}

mwpgen_status mwpgen_model_load(const char* path, mwpgen_model** out_model) {
  return guarded([&] {
    require(out_model != nullptr, ErrorCode::kContract, "null output pointer");
    fs::path p = arg(path, "model path");
    if (!fs::exists(p / "model.json")) {
      if (fs::exists(p / "best" / "model.json")) p /= "best";
      else if (fs::exists(p / "last" / "model.json")) p /= "last";
    }
    auto handle = std::make_unique<mwpgen_model>();
    handle->model = pipeline::load_model(p);
    *out_model = handle.release();
  });
}

void mwpgen_model_free(mwpgen_model* model) { delete model; }

mwpgen_status mwpgen_generate(mwpgen_model* model, const char* equations, const char* topic, const char* bind_x,
                              const char* bind_y, int samples, uint64_t seed, int beam, int max_len,
                              char** out_json) {
  return guarded([&] {
    require(model != nullptr && model->model != nullptr, ErrorCode::kContract, "null model handle");
    pipeline::GenerateRequest req;
    req.equations = arg(equations, "equations");
    req.topic = arg(topic, "topic");
    req.binding = {arg(bind_x, "x binding"), arg(bind_y, "y binding")};
    req.samples = samples;
    req.seed = seed;
    req.beam = beam;
    req.max_len = max_len;
    const auto result = pipeline::generate(*model->model, req);
    auto sys = eq::parse_system(req.equations);
    ordered_json outputs = ordered_json::array();
    for (const auto& g : result.outputs) {
      outputs.push_back({{"text", g.text}, {"delexicalized", g.delexicalized}, {"score", g.score}});
    }
    ordered_json j = {{"equations", eq::serialize(sys)},
                      {"topic", req.topic},
                      {"bind_x", req.binding.x},
                      {"bind_y", req.binding.y},
                      {"seed", seed},
                      {"solution", solution_json(sys, result.solution)},
                      {"outputs", outputs}};
    set_out(out_json, j.dump());
  });
}

mwpgen_status mwpgen_evaluate(const char* predictions_path, const char* references_path, char** out_report_json) {
  return guarded([&] {
    const auto preds = read_text_file(arg(predictions_path, "predictions path"), "text", "samples");
    const auto refs = read_text_file(arg(references_path, "references path"), "text", "references");
    require(preds.size() == refs.size(), ErrorCode::kContract,
            "predictions have " + std::to_string(preds.size()) + " lines but references have " +
                std::to_string(refs.size()));
    const auto report = metrics::evaluate(preds, refs);
    ordered_json samples = ordered_json::array();
    for (const auto& s : report.samples) {
      ordered_json e = {{"bleu4", s.bleu4}, {"rouge_l", s.rouge_l}};
      if (s.self_bleu) e["self_bleu"] = *s.self_bleu;
      samples.push_back(e);
    }
    ordered_json j = {{"inputs", preds.size()}, {"bleu4", report.bleu4}, {"rouge_l", report.rouge_l}};
    j["self_bleu"] = report.self_bleu ? ordered_json(*report.self_bleu) : ordered_json(nullptr);
    j["samples"] = samples;
    set_out(out_report_json, j.dump());
  });
}

}  // extern "C"
