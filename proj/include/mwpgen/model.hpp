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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwpgen/encoder.hpp"
#include "mwpgen/levi.hpp"
#include "mwpgen/rng.hpp"
#include "mwpgen/tensor.hpp"
#include "mwpgen/vocab.hpp"

namespace mwpgen::gen {

struct ModelConfig {
  int embedding = 128;
  int hidden = 512;
  int latent = 128;
  int hops = 3;
  bool share_encoders = false;
  double init_std = 0.02;
};

/// Parameter set of the whole model. Names:
///   embedding                                    V x E (shared by graphs, target encoder, decoder input)
///   eq_ggnn.* / kg_ggnn.*  (ggnn.* when shared)  see encoder::register_ggnn
///   prior.W1 prior.b1 prior.W2 prior.b2          2E -> 2E (tanh) -> 2L
///   posterior.gru.{W_ih,W_hh,b_ih,b_hh}          target encoder, E -> H
///   posterior.W_q posterior.b_q                  2E + H -> 2L
///   planner.W_beta                               H -> 2
///   planner.W_e planner.U_e planner.v_e          H x H, E x H, H x 1 (likewise _k)
///   decoder.W_d decoder.b_d                      2E -> E
///   decoder.gru.{W_ih,W_hh,b_ih,b_hh}            E -> H
///   decoder.W_h0                                 L + 2E -> H
///   decoder.W_out decoder.b_out                  H -> V
void register_parameters(nn::ParameterStore& store, const ModelConfig& config, int vocab_size, std::uint64_t seed);

struct GruWeights {
  nn::Var w_ih, w_hh, b_ih, b_hh;
};

/// All parameters bound onto one tape.
struct Weights {
  nn::Var embedding;
  encoder::GgnnWeights eq_ggnn, kg_ggnn;
  nn::Var prior_w1, prior_b1, prior_w2, prior_b2;
  GruWeights post_gru;
  nn::Var w_q, b_q;
  nn::Var w_beta, w_e, u_e, v_e, w_k, u_k, v_k;
  nn::Var w_d, b_d;
  GruWeights dec_gru;
  nn::Var w_h0, w_out, b_out;
};

Weights bind(nn::Tape& tape, nn::ParameterStore& store, const ModelConfig& config);

/// GRU cell with PyTorch gate layout (r, z, n):
///   r = s(x W_ir + b_ir + h W_hr + b_hr), z = s(...), n = tanh(x W_in + b_in + r * (h W_hn + b_hn)),
///   h' = (1 - z) * n + z * h
nn::Var gru_cell(const GruWeights& w, nn::Var x, nn::Var h);

/// A Levi graph with its adjacency and vocabulary ids computed once.
struct PreparedGraph {
  std::string key;  // identifies identical graphs for batching
  nn::Matrix adjacency;
  std::vector<int> ids;
};

PreparedGraph prepare_graph(const graph::LeviGraph& levi, const text::Vocab& vocab);

struct ModelInput {
  std::shared_ptr<const PreparedGraph> eq;
  std::shared_ptr<const PreparedGraph> kg;
  std::vector<int> target;  // delexicalized ids, without <bos>/<eos>
};

// --- latent Gaussians ---------------------------------------------------------

struct LatentGaussian {
  nn::Var mu;
  nn::Var log_sigma;
};

struct GaussianValue {
  nn::Matrix mu;
  nn::Matrix log_sigma;
};

/// Closed-form KL(q || p) of diagonal Gaussians, summed over dimensions,
/// one value per row.
std::vector<double> kl_divergence(const GaussianValue& q, const GaussianValue& p);
/// Same quantity on the tape, averaged over rows.
nn::Var kl_divergence(const LatentGaussian& q, const LatentGaussian& p);
/// z = mu + exp(log_sigma) * eps.
nn::Var reparameterize(const LatentGaussian& g, const nn::Matrix& eps);

// --- conditioning -----------------------------------------------------------

/// Encoded graphs of one side (equation or knowledge graph), deduplicated.
struct GraphContext {
  nn::Var gstar;             // stacked node rows of the unique graphs
  nn::Var keys;              // gstar U, stacked
  nn::Var pooled;            // one row per unique graph
  std::vector<int> offsets;  // per unique graph, plus the total
};

/// Node rows gathered for each decoder row, with the decoder row as segment.
struct AttentionView {
  nn::Var keys;
  nn::Var values;
  std::vector<int> segment;
  int rows = 0;
};

AttentionView make_view(const GraphContext& ctx, const std::vector<int>& row_graph);

struct Conditions {
  GraphContext eq, kg;
  std::vector<int> eq_graph;  // unique graph index per input row
  std::vector<int> kg_graph;
  nn::Var ge;                 // pooled equation vector per input row
  nn::Var gk;                 // pooled knowledge vector per input row
};

Conditions encode_conditions(nn::Tape& tape, const Weights& w, const ModelConfig& config,
                             const std::vector<const ModelInput*>& inputs);

LatentGaussian prior_net(const Weights& w, nn::Var ge, nn::Var gk);
/// Final target-encoder state: one row per input, each row read at its own
/// sequence end. Empty targets raise ContractError.
nn::Var encode_target(nn::Tape& tape, const Weights& w, const ModelConfig& config,
                      const std::vector<const ModelInput*>& inputs);
LatentGaussian posterior_net(const Weights& w, nn::Var ge, nn::Var gk, nn::Var target_state);

struct Plan {
  nn::Var c, c_e, c_k;
  nn::Var beta;              // rows x 1
  nn::Var alpha_e, alpha_k;  // stacked attention weights, segmented by row
};

Plan plan_step(const Weights& w, nn::Var h, const AttentionView& eq, const AttentionView& kg);

struct StepOut {
  Plan plan;
  nn::Var h_next;
  nn::Var logits;
};

/// One decoder step: plan from h_t, feed W_d[c_t; w_t] + b_d to the GRU,
/// project h_{t+1} to vocabulary logits.
StepOut decode_step(const Weights& w, nn::Var h, nn::Var prev_embedding, const AttentionView& eq,
                    const AttentionView& kg);

/// h_0 = [z; g_e; g_k] W_h0.
nn::Var initial_state(const Weights& w, nn::Var z, nn::Var ge, nn::Var gk);

// --- training objective --------------------------------------------------------

struct LossOptions {
  double kl_weight = 1.0;
  double teacher_forcing = 0.5;
  /// Use the posterior mean instead of a sample (evaluation).
  bool posterior_mean = false;
};

struct LossParts {
  nn::Var loss;
  double nll = 0.0;       // mean per-token NLL, averaged over the batch
  double kl = 0.0;        // mean KL over the batch
  long tokens = 0;        // predicted positions, <eos> included
  long correct = 0;       // argmax hits among them
};

/// loss = mean-per-token NLL + kl_weight * KL(posterior || prior).
LossParts training_loss(nn::Tape& tape, nn::ParameterStore& store, const ModelConfig& config,
                        const std::vector<const ModelInput*>& batch, const LossOptions& options, Rng& rng);

/// Linear KL weight: 0 at step 0, 1 from ramp_steps on.
double kl_weight(long step, long ramp_steps);

// --- inference -----------------------------------------------------------------

struct Hypothesis {
  std::vector<int> tokens;  // without <bos>; ends with <eos> unless cut at max_len
  double logp = 0.0;
  double score = 0.0;       // logp / tokens.size()
};

/// z defaults to a prior draw made by the caller; passed as a 1 x L matrix.
/// Tokens in `banned` are never emitted.
std::vector<Hypothesis> beam_search(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input,
                                    const nn::Matrix& z, int width, int max_len, std::span<const int> banned = {});
Hypothesis greedy_decode(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input,
                         const nn::Matrix& z, int max_len);

/// Batched greedy decoding with z fixed to the posterior mean (needs
/// targets) or the prior mean.
std::vector<std::vector<int>> greedy_decode_batch(nn::ParameterStore& store, const ModelConfig& config,
                                                  const std::vector<const ModelInput*>& inputs, bool use_posterior,
                                                  int max_len);

/// Prior mean and log-sigma for one input.
GaussianValue prior_of(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input);

}  // namespace mwpgen::gen
