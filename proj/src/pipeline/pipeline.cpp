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

#include "mwpgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <limits>

#include "json.hpp"
#include "mwpgen/checkpoint.hpp"
#include "mwpgen/error.hpp"
#include "mwpgen/optim.hpp"

namespace mwpgen::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<std::string> graph_tokens(const kg::KnowledgeGraph& kg) {
  std::set<std::string> out{"x", "y", eq::kDummyToken, kg::kXEntityToken, kg::kYEntityToken};
  for (const auto& s : text::slot_tokens()) out.insert(s);
  auto relation = [&](const std::string& r) {
    out.insert(r);
    out.insert(r + graph::kReverseSuffix);
  };
  for (const auto& r : eq::relation_vocabulary()) relation(r);
  for (const auto& r : kg.relations()) relation(r);
  relation(kg::kBindRelation);
  for (const auto& e : kg.entities()) out.insert(e);
  return {out.begin(), out.end()};
}

std::shared_ptr<const gen::PreparedGraph> GraphCache::equation(const eq::LinearSystem& system) {
  const std::string key = eq::shape_of(system);
  auto it = eq_.find(key);
  if (it != eq_.end()) return it->second;
  const auto levi = graph::levi_transform(eq::build_symbolic_graph(system).graph);
  auto g = std::make_shared<const gen::PreparedGraph>(gen::prepare_graph(levi, vocab_));
  eq_.emplace(key, g);
  return g;
}

std::shared_ptr<const gen::PreparedGraph> GraphCache::knowledge(const std::string& topic, const kg::Binding& binding) {
  const std::string key = topic + '\t' + binding.x + '\t' + binding.y;
  auto it = kg_cache_.find(key);
  if (it != kg_cache_.end()) return it->second;
  const auto inst = kg::topic_instance(kg_, topic, binding);
  auto g = std::make_shared<const gen::PreparedGraph>(gen::prepare_graph(inst.levi, vocab_));
  kg_cache_.emplace(key, g);
  return g;
}

Example prepare_example(const corpus::RawSample& raw, GraphCache& cache, const text::Vocab& vocab, int max_len,
                        std::vector<std::string>* warnings) {
  Example ex;
  ex.raw = raw;
  ex.system = eq::parse_system(raw.equations);
  eq::solve_system(ex.system);
  const kg::Binding binding{raw.bind_x, raw.bind_y};
  ex.delex = corpus::delexicalize(raw.text, ex.system, binding);
  ex.input.eq = cache.equation(ex.system);
  ex.input.kg = cache.knowledge(raw.topic, binding);
  std::vector<std::string> unknown;
  ex.input.target = vocab.encode(ex.delex.text, &unknown);
  require(!ex.input.target.empty(), ErrorCode::kContract, "sample with empty text: " + raw.equations);
  if (warnings != nullptr) {
    for (const auto& u : unknown) warnings->push_back("unknown character '" + u + "' in: " + raw.text);
  }
  if (static_cast<int>(ex.input.target.size()) > max_len) {
    if (warnings != nullptr) {
      warnings->push_back("target of " + std::to_string(ex.input.target.size()) + " tokens truncated to " +
                          std::to_string(max_len));
    }
    ex.input.target.resize(static_cast<std::size_t>(max_len));
  }
  return ex;
}

std::vector<Example> prepare_examples(std::span<const corpus::RawSample> raw, GraphCache& cache,
                                      const text::Vocab& vocab, int max_len, std::vector<std::string>* warnings) {
  std::vector<Example> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(prepare_example(r, cache, vocab, max_len, warnings));
  return out;
}

text::Vocab build_training_vocab(std::span<const corpus::RawSample> train, const kg::KnowledgeGraph& kg,
                                 int bpe_merges) {
  std::vector<std::string> lines;
  lines.reserve(train.size());
  for (const auto& r : train) {
    auto sys = eq::parse_system(r.equations);
    eq::solve_system(sys);
    lines.push_back(corpus::delexicalize(r.text, sys, {r.bind_x, r.bind_y}).text);
  }
  // printable ASCII is always encodable, whatever the training texts contain
  std::vector<std::string> extra = graph_tokens(kg);
  extra.push_back(text::kSpaceMark);
  for (char c = '!'; c <= '~'; ++c) extra.emplace_back(1, c);
  return text::build_vocab(lines, bpe_merges, extra);
}

// --- model bundle ---------------------------------------------------------------

std::unique_ptr<Model> create_model(const gen::ModelConfig& config, int max_len, text::Vocab vocab,
                                    kg::KnowledgeGraph kg, std::uint64_t seed) {
  require(max_len > 0, ErrorCode::kConfig, "max_len must be positive");
  auto m = std::make_unique<Model>();
  m->config = config;
  m->max_len = max_len;
  m->vocab = std::move(vocab);
  m->kg = std::move(kg);
  gen::register_parameters(m->params, config, m->vocab.size(), seed);
  return m;
}

namespace {

constexpr const char* kModelFormat = "mwpgen-model-v1";

ordered_json config_json(const Model& m) {
  return {{"format", kModelFormat},
          {"embedding", m.config.embedding},
          {"hidden", m.config.hidden},
          {"latent", m.config.latent},
          {"hops", m.config.hops},
          {"share_encoders", m.config.share_encoders},
          {"init_std", m.config.init_std},
          {"max_len", m.max_len},
          {"vocab_size", m.vocab.size()}};
}

}  // namespace

void save_model(const Model& model, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "model.json");
    require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + (dir / "model.json").string());
    out << config_json(model).dump(2) << '\n';
  }
  model.vocab.save(dir / "vocab.txt");
  {
    std::ofstream out(dir / "cskg.tsv", std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + (dir / "cskg.tsv").string());
    out << kg::serialize_triples(model.kg);
  }
  nn::save_checkpoint(model.params, dir / "params.json");
}

std::unique_ptr<Model> load_model(const fs::path& dir) {
  std::ifstream in(dir / "model.json");
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read model directory " + dir.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    fail(ErrorCode::kParse, (dir / "model.json").string() + ": " + e.what());
  }
  require(j.value("format", "") == kModelFormat, ErrorCode::kParse,
          (dir / "model.json").string() + ": unknown format");
  gen::ModelConfig c;
  c.embedding = j.at("embedding").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.latent = j.at("latent").get<int>();
  c.hops = j.at("hops").get<int>();
  c.share_encoders = j.at("share_encoders").get<bool>();
  c.init_std = j.at("init_std").get<double>();
  auto vocab = text::Vocab::load(dir / "vocab.txt");
  require(vocab.size() == j.at("vocab_size").get<int>(), ErrorCode::kParse, "vocabulary size does not match model.json");
  auto kg = kg::load_triples(dir / "cskg.tsv");
  auto m = create_model(c, j.at("max_len").get<int>(), std::move(vocab), std::move(kg), 0);
  nn::load_checkpoint(m->params, dir / "params.json");
  return m;
}

// --- training -------------------------------------------------------------------

namespace {

std::vector<const gen::ModelInput*> inputs_of(std::span<const Example> examples, std::size_t begin, std::size_t end) {
  std::vector<const gen::ModelInput*> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(&examples[i].input);
  return out;
}

}  // namespace

LossStats evaluate_loss(Model& model, std::span<const Example> examples, int batch) {
  require(batch > 0, ErrorCode::kConfig, "batch must be positive");
  LossStats s;
  if (examples.empty()) return s;
  gen::LossOptions opt;
  opt.teacher_forcing = 1.0;
  opt.posterior_mean = true;
  Rng rng(0);
  double nll_sum = 0.0, kl_sum = 0.0;
  long correct = 0;
  for (std::size_t b = 0; b < examples.size(); b += static_cast<std::size_t>(batch)) {
    const std::size_t e = std::min(examples.size(), b + static_cast<std::size_t>(batch));
    nn::Tape tape(false);
    const auto parts = gen::training_loss(tape, model.params, model.config, inputs_of(examples, b, e), opt, rng);
    const double rows = static_cast<double>(e - b);
    nll_sum += parts.nll * rows;
    kl_sum += parts.kl * rows;
    s.tokens += parts.tokens;
    correct += parts.correct;
  }
  const double n = static_cast<double>(examples.size());
  s.nll = nll_sum / n;
  s.kl = kl_sum / n;
  s.accuracy = s.tokens > 0 ? static_cast<double>(correct) / static_cast<double>(s.tokens) : 0.0;
  return s;
}

TrainReport train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainConfig& config, const fs::path& out_dir, const LogSink& log) {
  require(config.max_steps >= 0 && config.batch > 0 && config.lr > 0 && config.eval_every > 0 &&
              config.teacher_forcing >= 0 && config.teacher_forcing <= 1 && config.kl_ramp_fraction >= 0 &&
              config.kl_ramp_fraction <= 1 && config.kl_weight_max >= 0 && config.clip_norm > 0 && config.patience > 0,
          ErrorCode::kConfig, "invalid training configuration");
  require(!train_set.empty(), ErrorCode::kContract, "training set is empty");
  const auto emit = [&](const ordered_json& j) {
    if (log) log(j.dump());
  };
  const std::span<const Example> eval_set = dev_set.empty() ? train_set : dev_set;
  const std::string eval_name = dev_set.empty() ? "train" : "dev";

  nn::AdamState adam;
  adam.config.lr = config.lr;
  Rng rng(config.seed);
  const long ramp = std::lround(config.kl_ramp_fraction * static_cast<double>(config.max_steps));
  const std::size_t batch = std::min(train_set.size(), static_cast<std::size_t>(config.batch));

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();

  TrainReport report;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  auto evaluate_and_save = [&](long step) {
    const LossStats s = evaluate_loss(model, eval_set, config.batch);
    const double loss = s.nll + s.kl;
    require(std::isfinite(loss), ErrorCode::kNumeric, "non-finite " + eval_name + " loss at step " + std::to_string(step));
    const bool improved = loss < best;
    if (improved) {
      best = loss;
      stale = 0;
    } else if (++stale >= config.patience) {
      adam.config.lr *= 0.5;
      stale = 0;
    }
    if (!out_dir.empty()) {
      save_model(model, out_dir / "last");
      if (improved) {
        fs::remove_all(out_dir / "best");
        fs::copy(out_dir / "last", out_dir / "best", fs::copy_options::recursive);
      }
    }
    emit({{"event", "eval"}, {"step", step}, {"split", eval_name}, {"nll", s.nll}, {"kl", s.kl},
          {"accuracy", s.accuracy}, {"best", improved}, {"lr", adam.config.lr}});
  };

  if (config.max_steps == 0) {
    if (!out_dir.empty()) save_model(model, out_dir / "last");
    emit({{"event", "init"}, {"params", model.params.scalar_count()}});
    report.lr = adam.config.lr;
    return report;
  }

  for (long step = 1; step <= config.max_steps; ++step) {
    if (cursor + batch > order.size()) {
      rng.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    std::vector<const gen::ModelInput*> inputs;
    for (std::size_t k = 0; k < batch; ++k) inputs.push_back(&train_set[order[cursor + k]].input);
    cursor += batch;

    gen::LossOptions opt;
    opt.kl_weight = config.kl_weight_max * gen::kl_weight(step - 1, ramp);
    opt.teacher_forcing = config.teacher_forcing;
    model.params.zero_grad();
    nn::Tape tape;
    const auto parts = gen::training_loss(tape, model.params, model.config, inputs, opt, rng);
    require(std::isfinite(parts.loss.scalar()), ErrorCode::kNumeric, "non-finite loss at step " + std::to_string(step));
    tape.backward(parts.loss);
    const double norm = nn::clip_grad_norm(model.params, config.clip_norm);
    require(std::isfinite(norm), ErrorCode::kNumeric, "non-finite gradient norm at step " + std::to_string(step));
    nn::adam_step(model.params, adam);

    report.steps = step;
    report.last_nll = parts.nll;
    report.last_kl = parts.kl;
    emit({{"event", "step"}, {"step", step}, {"loss", parts.loss.scalar()}, {"nll", parts.nll}, {"kl", parts.kl},
          {"kl_weight", opt.kl_weight}, {"accuracy", parts.tokens ? double(parts.correct) / double(parts.tokens) : 0.0},
          {"grad_norm", norm}, {"lr", adam.config.lr}});
    if (step % config.eval_every == 0 || step == config.max_steps) evaluate_and_save(step);
  }
  report.best_eval_loss = best;
  report.lr = adam.config.lr;
  return report;
}

// --- generation --------------------------------------------------------------------

Generation decode_one(Model& model, const gen::ModelInput& input, const corpus::SlotMap& slots, const nn::Matrix& z,
                      int beam, int max_len) {
  std::vector<int> banned;
  for (const auto& slot : text::slot_tokens()) {
    if (!slots.count(slot) && model.vocab.contains(slot)) banned.push_back(model.vocab.id(slot));
  }
  const auto hyps = gen::beam_search(model.params, model.config, input, z, beam, max_len, banned);
  std::string first_missing;
  for (const auto& h : hyps) {
    const std::string delex = model.vocab.decode(h.tokens);
    std::string missing;
    for (const auto& s : corpus::slots_in(delex)) {
      if (!slots.count(s)) {
        missing = s;
        break;
      }
    }
    if (missing.empty()) return {corpus::relexicalize(delex, slots), delex, h.score};
    if (first_missing.empty()) first_missing = missing;
  }
  fail(ErrorCode::kMissingSlot, "every beam uses slot " + first_missing + ", which the equations do not provide");
}

GenerateResult generate(Model& model, const GenerateRequest& request) {
  require(request.samples >= 1 && request.beam >= 1 && request.max_len >= 1, ErrorCode::kConfig,
          "samples, beam and max_len must be positive");
  GenerateResult result;
  auto sys = eq::parse_system(request.equations);
  result.solution = eq::solve_system(sys);
  GraphCache cache(model.kg, model.vocab);
  gen::ModelInput input;
  input.kg = cache.knowledge(request.topic, request.binding);
  input.eq = cache.equation(sys);
  const auto slots = corpus::generation_slots(sys, request.binding);
  const auto prior = gen::prior_of(model.params, model.config, input);
  Rng rng(request.seed);
  for (int i = 0; i < request.samples; ++i) {
    nn::Matrix z(1, model.config.latent);
    for (Eigen::Index k = 0; k < z.cols(); ++k) z(0, k) = prior.mu(0, k) + std::exp(prior.log_sigma(0, k)) * rng.normal();
    result.outputs.push_back(decode_one(model, input, slots, z, request.beam, request.max_len));
  }
  return result;
}

}  // namespace mwpgen::pipeline
