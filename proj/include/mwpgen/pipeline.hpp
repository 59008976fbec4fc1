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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mwpgen/corpus.hpp"
#include "mwpgen/cskg.hpp"
#include "mwpgen/model.hpp"
#include "mwpgen/tensor.hpp"
#include "mwpgen/vocab.hpp"

namespace mwpgen::pipeline {

/// Every token that can label a node of an equation or CSKG Levi graph.
std::vector<std::string> graph_tokens(const kg::KnowledgeGraph& kg);

/// Prepared graphs shared between samples with the same equation shape or
/// the same (topic, binding).
class GraphCache {
 public:
  GraphCache(const kg::KnowledgeGraph& kg, const text::Vocab& vocab) : kg_(kg), vocab_(vocab) {}
  std::shared_ptr<const gen::PreparedGraph> equation(const eq::LinearSystem& system);
  std::shared_ptr<const gen::PreparedGraph> knowledge(const std::string& topic, const kg::Binding& binding);

 private:
  const kg::KnowledgeGraph& kg_;
  const text::Vocab& vocab_;
  std::map<std::string, std::shared_ptr<const gen::PreparedGraph>> eq_, kg_cache_;
};

struct Example {
  corpus::RawSample raw;
  eq::LinearSystem system;
  corpus::Delexed delex;
  gen::ModelInput input;
};

/// Solves, delexicalizes and encodes one sample. Targets longer than
/// max_len are truncated and reported through `warnings`.
Example prepare_example(const corpus::RawSample& raw, GraphCache& cache, const text::Vocab& vocab, int max_len,
                        std::vector<std::string>* warnings = nullptr);
std::vector<Example> prepare_examples(std::span<const corpus::RawSample> raw, GraphCache& cache,
                                      const text::Vocab& vocab, int max_len,
                                      std::vector<std::string>* warnings = nullptr);

/// Vocabulary over the delexicalized training texts plus all graph tokens.
text::Vocab build_training_vocab(std::span<const corpus::RawSample> train, const kg::KnowledgeGraph& kg,
                                 int bpe_merges);

/// A trained (or freshly initialized) model with everything needed to
/// decode: dimensions, vocabulary, knowledge graph and parameters.
struct Model {
  gen::ModelConfig config;
  int max_len = 100;
  text::Vocab vocab;
  kg::KnowledgeGraph kg;
  nn::ParameterStore params;
};

std::unique_ptr<Model> create_model(const gen::ModelConfig& config, int max_len, text::Vocab vocab,
                                    kg::KnowledgeGraph kg, std::uint64_t seed);

/// Model directory: model.json, vocab.txt, params.json + params.bin, cskg.tsv.
void save_model(const Model& model, const std::filesystem::path& dir);
std::unique_ptr<Model> load_model(const std::filesystem::path& dir);

// --- training ------------------------------------------------------------------

struct TrainConfig {
  long max_steps = 2000;
  int batch = 32;
  double lr = 1e-3;
  double teacher_forcing = 0.5;
  double kl_ramp_fraction = 0.5;
  double kl_weight_max = 1.0;  // weight reached at the end of the ramp
  long eval_every = 100;
  int patience = 3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct LossStats {
  double nll = 0.0;       // token-weighted mean NLL
  double kl = 0.0;        // mean KL
  double accuracy = 0.0;  // teacher-forced argmax accuracy
  long tokens = 0;
};

/// Teacher-forced evaluation with z at the posterior mean.
LossStats evaluate_loss(Model& model, std::span<const Example> examples, int batch);

struct TrainReport {
  long steps = 0;
  double last_nll = 0.0;
  double last_kl = 0.0;
  double best_eval_loss = 0.0;
  double lr = 0.0;
};

/// Sink for line-oriented JSON log records.
using LogSink = std::function<void(const std::string& json_line)>;

/// Minibatch training with scheduled sampling, linear KL annealing, gradient
/// clipping and Adam. Every eval_every steps (and at the end) the model is
/// scored on `dev` (on `train` when dev is empty) and, when out_dir is set,
/// written to out_dir/"last"; the best scoring one is copied to
/// out_dir/"best". The learning rate halves after `patience` evaluations
/// without improvement. A non-finite loss or gradient raises NumericError
/// without touching the saved checkpoints.
TrainReport train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const TrainConfig& config, const std::filesystem::path& out_dir, const LogSink& log = {});

// --- generation -------------------------------------------------------------------

struct GenerateRequest {
  std::string equations;
  std::string topic;
  kg::Binding binding;
  int samples = 4;
  std::uint64_t seed = 1;
  int beam = 5;
  int max_len = 100;
};

struct Generation {
  std::string text;
  std::string delexicalized;
  double score = 0.0;
};

struct GenerateResult {
  eq::Solution solution;
  std::vector<Generation> outputs;
};

/// Draws `samples` latent vectors from the prior (seeded), beam-decodes each
/// and relexicalizes the best beam whose slots are all fillable. Input errors
/// surface before any decoding.
GenerateResult generate(Model& model, const GenerateRequest& request);

/// One beam-decoded, relexicalized sample for a prepared input with the
/// latent fixed to `z`.
Generation decode_one(Model& model, const gen::ModelInput& input, const corpus::SlotMap& slots, const nn::Matrix& z,
                      int beam, int max_len);

}  // namespace mwpgen::pipeline
