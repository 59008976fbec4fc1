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

#include "mwpgen/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "mwpgen/error.hpp"
#include "mwpgen/optim.hpp"

namespace mwpgen::gen {

using nn::Matrix;
using nn::Var;

namespace {

std::string ggnn_prefix(const ModelConfig& c, const char* side) { return c.share_encoders ? "ggnn" : side; }

void register_gru(nn::ParameterStore& s, const std::string& prefix, int in, int hidden, double std, Rng& rng) {
  s.add(prefix + ".W_ih", nn::init_normal(in, 3 * hidden, std, rng));
  s.add(prefix + ".W_hh", nn::init_normal(hidden, 3 * hidden, std, rng));
  s.add(prefix + ".b_ih", Matrix::Zero(1, 3 * hidden));
  s.add(prefix + ".b_hh", Matrix::Zero(1, 3 * hidden));
}

GruWeights bind_gru(nn::Tape& t, nn::ParameterStore& s, const std::string& prefix) {
  return {t.param(s.at(prefix + ".W_ih")), t.param(s.at(prefix + ".W_hh")), t.param(s.at(prefix + ".b_ih")),
          t.param(s.at(prefix + ".b_hh"))};
}

/// Index of the largest entry; ties go to the lowest index.
int argmax_row(const Matrix& m, Eigen::Index r) {
  int best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(r, c) > m(r, best)) best = static_cast<int>(c);
  }
  return best;
}

Eigen::RowVectorXd log_softmax_row(const Matrix& logits, Eigen::Index r) {
  const double mx = logits.row(r).maxCoeff();
  const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
  return logits.row(r).array() - lse;
}

int argmax_vec(const Eigen::RowVectorXd& v) {
  int best = 0;
  for (Eigen::Index c = 1; c < v.size(); ++c) {
    if (v(c) > v(best)) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

void register_parameters(nn::ParameterStore& s, const ModelConfig& c, int vocab_size, std::uint64_t seed) {
  require(c.embedding > 0 && c.hidden > 0 && c.latent > 0 && c.hops >= 0 && vocab_size > 0, ErrorCode::kConfig,
          "model dimensions must be positive");
  Rng rng(seed);
  const int e = c.embedding, h = c.hidden, l = c.latent;
  const double sd = c.init_std;
  s.add("embedding", nn::init_normal(vocab_size, e, sd, rng));
  if (c.share_encoders) {
    encoder::register_ggnn(s, "ggnn", e, sd, rng);
  } else {
    encoder::register_ggnn(s, "eq_ggnn", e, sd, rng);
    encoder::register_ggnn(s, "kg_ggnn", e, sd, rng);
  }
  s.add("prior.W1", nn::init_normal(2 * e, 2 * e, sd, rng));
  s.add("prior.b1", Matrix::Zero(1, 2 * e));
  s.add("prior.W2", nn::init_normal(2 * e, 2 * l, sd, rng));
  s.add("prior.b2", Matrix::Zero(1, 2 * l));
  register_gru(s, "posterior.gru", e, h, sd, rng);
  s.add("posterior.W_q", nn::init_normal(2 * e + h, 2 * l, sd, rng));
  s.add("posterior.b_q", Matrix::Zero(1, 2 * l));
  s.add("planner.W_beta", nn::init_normal(h, 2, sd, rng));
  s.add("planner.W_e", nn::init_normal(h, h, sd, rng));
  s.add("planner.U_e", nn::init_normal(e, h, sd, rng));
  s.add("planner.v_e", nn::init_normal(h, 1, sd, rng));
  s.add("planner.W_k", nn::init_normal(h, h, sd, rng));
  s.add("planner.U_k", nn::init_normal(e, h, sd, rng));
  s.add("planner.v_k", nn::init_normal(h, 1, sd, rng));
  s.add("decoder.W_d", nn::init_normal(2 * e, e, sd, rng));
  s.add("decoder.b_d", Matrix::Zero(1, e));
  register_gru(s, "decoder.gru", e, h, sd, rng);
  s.add("decoder.W_h0", nn::init_normal(l + 2 * e, h, sd, rng));
  s.add("decoder.W_out", nn::init_normal(h, vocab_size, sd, rng));
  s.add("decoder.b_out", Matrix::Zero(1, vocab_size));
}

Weights bind(nn::Tape& t, nn::ParameterStore& s, const ModelConfig& c) {
  Weights w;
  auto p = [&](const char* name) { return t.param(s.at(name)); };
  w.embedding = p("embedding");
  w.eq_ggnn = encoder::bind_ggnn(t, s, ggnn_prefix(c, "eq_ggnn"));
  w.kg_ggnn = c.share_encoders ? w.eq_ggnn : encoder::bind_ggnn(t, s, "kg_ggnn");
  w.prior_w1 = p("prior.W1");
  w.prior_b1 = p("prior.b1");
  w.prior_w2 = p("prior.W2");
  w.prior_b2 = p("prior.b2");
  w.post_gru = bind_gru(t, s, "posterior.gru");
  w.w_q = p("posterior.W_q");
  w.b_q = p("posterior.b_q");
  w.w_beta = p("planner.W_beta");
  w.w_e = p("planner.W_e");
  w.u_e = p("planner.U_e");
  w.v_e = p("planner.v_e");
  w.w_k = p("planner.W_k");
  w.u_k = p("planner.U_k");
  w.v_k = p("planner.v_k");
  w.w_d = p("decoder.W_d");
  w.b_d = p("decoder.b_d");
  w.dec_gru = bind_gru(t, s, "decoder.gru");
  w.w_h0 = p("decoder.W_h0");
  w.w_out = p("decoder.W_out");
  w.b_out = p("decoder.b_out");
  return w;
}

Var gru_cell(const GruWeights& w, Var x, Var h) {
  const Eigen::Index n = h.cols();
  Var gi = nn::add_row(nn::matmul(x, w.w_ih), w.b_ih);
  Var gh = nn::add_row(nn::matmul(h, w.w_hh), w.b_hh);
  Var r = nn::sigmoid(nn::add(nn::slice(gi, 0, n), nn::slice(gh, 0, n)));
  Var z = nn::sigmoid(nn::add(nn::slice(gi, n, 2 * n), nn::slice(gh, n, 2 * n)));
  Var cand = nn::tanh(nn::add(nn::slice(gi, 2 * n, 3 * n), nn::mul(r, nn::slice(gh, 2 * n, 3 * n))));
  return nn::add(nn::mul(nn::affine(z, -1.0, 1.0), cand), nn::mul(z, h));
}

PreparedGraph prepare_graph(const graph::LeviGraph& levi, const text::Vocab& vocab) {
  PreparedGraph g;
  g.adjacency = graph::row_normalize(levi);
  g.ids = encoder::node_ids(levi, vocab);
  std::ostringstream key;
  for (int id : g.ids) key << id << ',';
  key << '|';
  for (const auto& e : levi.edges) key << e.from << '>' << e.to << ',';
  g.key = key.str();
  return g;
}

// --- latent ------------------------------------------------------------------

std::vector<double> kl_divergence(const GaussianValue& q, const GaussianValue& p) {
  require(q.mu.rows() == p.mu.rows() && q.mu.cols() == p.mu.cols(), ErrorCode::kDimension, "KL of mismatched Gaussians");
  std::vector<double> out;
  for (Eigen::Index r = 0; r < q.mu.rows(); ++r) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < q.mu.cols(); ++i) {
      const double lq = q.log_sigma(r, i), lp = p.log_sigma(r, i);
      const double d = q.mu(r, i) - p.mu(r, i);
      total += 0.5 * (std::exp(2.0 * (lq - lp)) + d * d * std::exp(-2.0 * lp)) - 0.5 + (lp - lq);
    }
    out.push_back(total);
  }
  return out;
}

Var kl_divergence(const LatentGaussian& q, const LatentGaussian& p) {
  Var d = nn::sub(q.mu, p.mu);
  Var ratio = nn::exp(nn::affine(nn::sub(q.log_sigma, p.log_sigma), 2.0, 0.0));
  Var scaled = nn::mul(nn::mul(d, d), nn::exp(nn::affine(p.log_sigma, -2.0, 0.0)));
  Var per_dim = nn::add(nn::affine(nn::add(ratio, scaled), 0.5, -0.5), nn::sub(p.log_sigma, q.log_sigma));
  return nn::affine(nn::sum(per_dim), 1.0 / static_cast<double>(q.mu.rows()), 0.0);
}

Var reparameterize(const LatentGaussian& g, const Matrix& eps) {
  nn::Tape* tape = g.mu.tape();
  return nn::add(g.mu, nn::mul(nn::exp(g.log_sigma), tape->constant(eps)));
}

// --- conditioning ------------------------------------------------------------

namespace {

GraphContext encode_side(nn::Tape& tape, Var embedding, const encoder::GgnnWeights& gw, Var u, int hops,
                         const std::vector<const PreparedGraph*>& graphs) {
  std::vector<Matrix> adj;
  std::vector<std::vector<int>> ids;
  for (const auto* g : graphs) {
    adj.push_back(g->adjacency);
    ids.push_back(g->ids);
  }
  const auto batch = encoder::make_batch(adj, ids);
  const auto enc = encoder::ggnn_encode(tape, embedding, gw, batch, hops);
  GraphContext ctx;
  ctx.gstar = enc.gstar;
  ctx.keys = nn::matmul(enc.gstar, u);
  ctx.pooled = enc.pooled;
  ctx.offsets = batch.offsets;
  return ctx;
}

/// Unique graphs in first-appearance order plus the index of each input's graph.
std::vector<const PreparedGraph*> dedupe(const std::vector<const PreparedGraph*>& all, std::vector<int>& index) {
  std::map<std::string, int> seen;
  std::vector<const PreparedGraph*> unique;
  for (const auto* g : all) {
    auto [it, fresh] = seen.emplace(g->key, static_cast<int>(unique.size()));
    if (fresh) unique.push_back(g);
    index.push_back(it->second);
  }
  return unique;
}

}  // namespace

AttentionView make_view(const GraphContext& ctx, const std::vector<int>& row_graph) {
  AttentionView v;
  std::vector<int> idx;
  for (std::size_t r = 0; r < row_graph.size(); ++r) {
    const int g = row_graph[r];
    for (int i = ctx.offsets[static_cast<std::size_t>(g)]; i < ctx.offsets[static_cast<std::size_t>(g) + 1]; ++i) {
      idx.push_back(i);
      v.segment.push_back(static_cast<int>(r));
    }
  }
  v.keys = nn::embed_lookup(ctx.keys, idx);
  v.values = nn::embed_lookup(ctx.gstar, idx);
  v.rows = static_cast<int>(row_graph.size());
  return v;
}

Conditions encode_conditions(nn::Tape& tape, const Weights& w, const ModelConfig& config,
                             const std::vector<const ModelInput*>& inputs) {
  require(!inputs.empty(), ErrorCode::kContract, "empty batch");
  std::vector<const PreparedGraph*> eqs, kgs;
  for (const auto* in : inputs) {
    require(in->eq && in->kg, ErrorCode::kContract, "model input without graphs");
    eqs.push_back(in->eq.get());
    kgs.push_back(in->kg.get());
  }
  Conditions c;
  const auto ueq = dedupe(eqs, c.eq_graph);
  const auto ukg = dedupe(kgs, c.kg_graph);
  c.eq = encode_side(tape, w.embedding, w.eq_ggnn, w.u_e, config.hops, ueq);
  c.kg = encode_side(tape, w.embedding, w.kg_ggnn, w.u_k, config.hops, ukg);
  c.ge = nn::embed_lookup(c.eq.pooled, c.eq_graph);
  c.gk = nn::embed_lookup(c.kg.pooled, c.kg_graph);
  return c;
}

LatentGaussian prior_net(const Weights& w, Var ge, Var gk) {
  Var h1 = nn::tanh(nn::add_row(nn::matmul(nn::concat({ge, gk}), w.prior_w1), w.prior_b1));
  Var out = nn::add_row(nn::matmul(h1, w.prior_w2), w.prior_b2);
  const Eigen::Index l = out.cols() / 2;
  return {nn::slice(out, 0, l), nn::slice(out, l, 2 * l)};
}

Var encode_target(nn::Tape& tape, const Weights& w, const ModelConfig& config,
                  const std::vector<const ModelInput*>& inputs) {
  std::size_t longest = 0;
  for (const auto* in : inputs) {
    require(!in->target.empty(), ErrorCode::kContract, "posterior needs a non-empty target");
    longest = std::max(longest, in->target.size());
  }
  const auto rows = static_cast<Eigen::Index>(inputs.size());
  Var h = tape.constant(Matrix::Zero(rows, config.hidden));
  for (std::size_t t = 0; t < longest; ++t) {
    std::vector<int> ids;
    Matrix mask(rows, 1);
    for (Eigen::Index b = 0; b < rows; ++b) {
      const auto& tgt = inputs[static_cast<std::size_t>(b)]->target;
      const bool live = t < tgt.size();
      ids.push_back(live ? tgt[t] : 0);
      mask(b, 0) = live ? 1.0 : 0.0;
    }
    Var next = gru_cell(w.post_gru, nn::embed_lookup(w.embedding, ids), h);
    h = mask.minCoeff() == 1.0 ? next : nn::add(h, nn::mul_col(nn::sub(next, h), tape.constant(mask)));
  }
  return h;
}

LatentGaussian posterior_net(const Weights& w, Var ge, Var gk, Var target_state) {
  Var out = nn::add_row(nn::matmul(nn::concat({ge, gk, target_state}), w.w_q), w.b_q);
  const Eigen::Index l = out.cols() / 2;
  return {nn::slice(out, 0, l), nn::slice(out, l, 2 * l)};
}

Plan plan_step(const Weights& w, Var h, const AttentionView& eq, const AttentionView& kg) {
  Plan p;
  Var se = nn::attention_scores(nn::matmul(h, w.w_e), eq.keys, w.v_e, eq.segment);
  p.alpha_e = nn::segment_softmax(se, eq.segment, eq.rows);
  p.c_e = nn::segment_weighted_sum(p.alpha_e, eq.values, eq.segment, eq.rows);
  Var sk = nn::attention_scores(nn::matmul(h, w.w_k), kg.keys, w.v_k, kg.segment);
  p.alpha_k = nn::segment_softmax(sk, kg.segment, kg.rows);
  p.c_k = nn::segment_weighted_sum(p.alpha_k, kg.values, kg.segment, kg.rows);
  p.beta = nn::slice(nn::softmax(nn::matmul(h, w.w_beta)), 0, 1);
  p.c = nn::add(nn::mul_col(p.c_e, p.beta), nn::mul_col(p.c_k, nn::affine(p.beta, -1.0, 1.0)));
  return p;
}

StepOut decode_step(const Weights& w, Var h, Var prev_embedding, const AttentionView& eq, const AttentionView& kg) {
  StepOut out;
  out.plan = plan_step(w, h, eq, kg);
  Var x = nn::add_row(nn::matmul(nn::concat({out.plan.c, prev_embedding}), w.w_d), w.b_d);
  out.h_next = gru_cell(w.dec_gru, x, h);
  out.logits = nn::add_row(nn::matmul(out.h_next, w.w_out), w.b_out);
  return out;
}

Var initial_state(const Weights& w, Var z, Var ge, Var gk) { return nn::matmul(nn::concat({z, ge, gk}), w.w_h0); }

// --- objective ---------------------------------------------------------------

double kl_weight(long step, long ramp_steps) {
  if (ramp_steps <= 0) return 1.0;
  return std::min(1.0, static_cast<double>(step) / static_cast<double>(ramp_steps));
}

LossParts training_loss(nn::Tape& tape, nn::ParameterStore& store, const ModelConfig& config,
                        const std::vector<const ModelInput*>& batch, const LossOptions& options, Rng& rng) {
  const Weights w = bind(tape, store, config);
  const Conditions cond = encode_conditions(tape, w, config, batch);
  const LatentGaussian prior = prior_net(w, cond.ge, cond.gk);
  const LatentGaussian post = posterior_net(w, cond.ge, cond.gk, encode_target(tape, w, config, batch));
  const auto rows = static_cast<Eigen::Index>(batch.size());
  Var z;
  if (options.posterior_mean) {
    z = post.mu;
  } else {
    Matrix eps(rows, config.latent);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
    z = reparameterize(post, eps);
  }
  Var kl = kl_divergence(post, prior);

  Var h = initial_state(w, z, cond.ge, cond.gk);
  const AttentionView ve = make_view(cond.eq, cond.eq_graph);
  const AttentionView vk = make_view(cond.kg, cond.kg_graph);

  const int bos = 1, eos = 2, pad = 0;
  std::size_t longest = 0;
  for (const auto* in : batch) longest = std::max(longest, in->target.size());
  std::vector<int> prev(batch.size(), bos);
  LossParts parts;
  Var nll;
  for (std::size_t t = 0; t <= longest; ++t) {
    const StepOut step = decode_step(w, h, nn::embed_lookup(w.embedding, prev), ve, vk);
    std::vector<int> targets(batch.size(), pad);
    std::vector<double> weights(batch.size(), 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& tgt = batch[b]->target;
      if (t < tgt.size()) targets[b] = tgt[t];
      else if (t == tgt.size()) targets[b] = eos;
      else continue;
      weights[b] = 1.0 / (static_cast<double>(rows) * static_cast<double>(tgt.size() + 1));
    }
    Var ce = nn::cross_entropy(step.logits, targets, weights);
    nll = nll.valid() ? nn::add(nll, ce) : ce;
    const Matrix& logits = step.logits.value();
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (weights[b] == 0.0) continue;
      const int guess = argmax_row(logits, static_cast<Eigen::Index>(b));
      ++parts.tokens;
      if (guess == targets[b]) ++parts.correct;
      if (t < batch[b]->target.size()) prev[b] = rng.bernoulli(options.teacher_forcing) ? targets[b] : guess;
      else prev[b] = pad;
    }
    h = step.h_next;
  }
  parts.nll = nll.scalar();
  parts.kl = kl.scalar();
  parts.loss = nn::add(nll, nn::affine(kl, options.kl_weight, 0.0));
  return parts;
}

// --- inference ---------------------------------------------------------------

GaussianValue prior_of(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input) {
  nn::Tape tape(false);
  const Weights w = bind(tape, store, config);
  const Conditions cond = encode_conditions(tape, w, config, {&input});
  const LatentGaussian p = prior_net(w, cond.ge, cond.gk);
  return {p.mu.value(), p.log_sigma.value()};
}

std::vector<Hypothesis> beam_search(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input,
                                    const Matrix& z, int width, int max_len, std::span<const int> banned) {
  require(width >= 1, ErrorCode::kContract, "beam width must be at least 1");
  require(max_len >= 1, ErrorCode::kContract, "max_len must be at least 1");
  require(z.rows() == 1 && z.cols() == config.latent, ErrorCode::kDimension, "latent draw has shape " + nn::shape_string(z));
  nn::Tape tape(false);
  const Weights w = bind(tape, store, config);
  const Conditions cond = encode_conditions(tape, w, config, {&input});
  const std::vector<int> rows(static_cast<std::size_t>(width), 0);
  const AttentionView ve = make_view(cond.eq, rows);
  const AttentionView vk = make_view(cond.kg, rows);
  Var h = nn::repeat_rows(initial_state(w, tape.constant(z), cond.ge, cond.gk), width);

  const int bos = 1, eos = 2;
  std::vector<Hypothesis> active{Hypothesis{}};
  std::vector<Hypothesis> finished;
  for (int t = 0; t < max_len && !active.empty(); ++t) {
    std::vector<int> prev(static_cast<std::size_t>(width), bos);
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (!active[i].tokens.empty()) prev[i] = active[i].tokens.back();
    }
    for (std::size_t i = active.size(); i < prev.size(); ++i) prev[i] = prev[0];
    const StepOut step = decode_step(w, h, nn::embed_lookup(w.embedding, prev), ve, vk);

    struct Candidate {
      double logp;
      int beam;
      int token;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < active.size(); ++i) {
      Eigen::RowVectorXd lp = log_softmax_row(step.logits.value(), static_cast<Eigen::Index>(i));
      for (int b : banned) lp(b) = -std::numeric_limits<double>::infinity();
      std::vector<int> order(static_cast<std::size_t>(lp.size()));
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
      const auto top = std::min<std::size_t>(static_cast<std::size_t>(width), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                        [&](int a, int b) { return lp(a) > lp(b) || (lp(a) == lp(b) && a < b); });
      for (std::size_t k = 0; k < top; ++k) {
        if (!std::isfinite(lp(order[k]))) continue;
        cands.push_back({active[i].logp + lp(order[k]), static_cast<int>(i), order[k]});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.logp > b.logp; });
    cands.resize(std::min<std::size_t>(cands.size(), static_cast<std::size_t>(width)));

    std::vector<Hypothesis> next;
    std::vector<int> parents;
    for (const auto& c : cands) {
      Hypothesis hyp = active[static_cast<std::size_t>(c.beam)];
      hyp.tokens.push_back(c.token);
      hyp.logp = c.logp;
      if (c.token == eos || t + 1 == max_len) {
        finished.push_back(std::move(hyp));
      } else {
        next.push_back(std::move(hyp));
        parents.push_back(c.beam);
      }
    }
    active = std::move(next);
    if (static_cast<int>(finished.size()) >= width) break;
    if (!active.empty()) {
      while (static_cast<int>(parents.size()) < width) parents.push_back(parents[0]);
      h = nn::embed_lookup(step.h_next, parents);
    }
  }
  for (auto& hyp : finished) hyp.score = hyp.logp / static_cast<double>(hyp.tokens.size());
  std::stable_sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  if (static_cast<int>(finished.size()) > width) finished.resize(static_cast<std::size_t>(width));
  return finished;
}

Hypothesis greedy_decode(nn::ParameterStore& store, const ModelConfig& config, const ModelInput& input, const Matrix& z,
                         int max_len) {
  nn::Tape tape(false);
  const Weights w = bind(tape, store, config);
  const Conditions cond = encode_conditions(tape, w, config, {&input});
  const AttentionView ve = make_view(cond.eq, {0});
  const AttentionView vk = make_view(cond.kg, {0});
  Var h = initial_state(w, tape.constant(z), cond.ge, cond.gk);
  Hypothesis hyp;
  int prev = 1;
  for (int t = 0; t < max_len; ++t) {
    const StepOut step = decode_step(w, h, nn::embed_lookup(w.embedding, std::vector<int>{prev}), ve, vk);
    const Eigen::RowVectorXd lp = log_softmax_row(step.logits.value(), 0);
    prev = argmax_vec(lp);
    hyp.tokens.push_back(prev);
    hyp.logp += lp(prev);
    if (prev == 2) break;
    h = step.h_next;
  }
  hyp.score = hyp.logp / static_cast<double>(hyp.tokens.size());
  return hyp;
}

std::vector<std::vector<int>> greedy_decode_batch(nn::ParameterStore& store, const ModelConfig& config,
                                                  const std::vector<const ModelInput*>& inputs, bool use_posterior,
                                                  int max_len) {
  nn::Tape tape(false);
  const Weights w = bind(tape, store, config);
  const Conditions cond = encode_conditions(tape, w, config, inputs);
  Var z = use_posterior ? posterior_net(w, cond.ge, cond.gk, encode_target(tape, w, config, inputs)).mu
                        : prior_net(w, cond.ge, cond.gk).mu;
  Var h = initial_state(w, z, cond.ge, cond.gk);
  const AttentionView ve = make_view(cond.eq, cond.eq_graph);
  const AttentionView vk = make_view(cond.kg, cond.kg_graph);
  std::vector<std::vector<int>> out(inputs.size());
  std::vector<int> prev(inputs.size(), 1);
  std::vector<bool> done(inputs.size(), false);
  for (int t = 0; t < max_len; ++t) {
    const StepOut step = decode_step(w, h, nn::embed_lookup(w.embedding, prev), ve, vk);
    bool all_done = true;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
      if (done[b]) continue;
      prev[b] = argmax_vec(log_softmax_row(step.logits.value(), static_cast<Eigen::Index>(b)));
      if (prev[b] == 2) done[b] = true;
      else out[b].push_back(prev[b]);
      all_done = all_done && done[b];
    }
    if (all_done) break;
    h = step.h_next;
  }
  return out;
}

}  // namespace mwpgen::gen
