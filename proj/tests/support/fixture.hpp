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

#include <memory>
#include <string>
#include <vector>

#include "mwpgen/corpus.hpp"
#include "mwpgen/error.hpp"
#include "mwpgen/optim.hpp"
#include "mwpgen/pipeline.hpp"
#include "support/gradcheck.hpp"

namespace mwpgen::testing {

/// A synthetic corpus with its vocabulary, model and prepared examples.
struct Fixture {
  std::vector<corpus::MwpTemplate> templates;
  std::vector<corpus::RawSample> raw;
  std::unique_ptr<pipeline::Model> model;
  std::unique_ptr<pipeline::GraphCache> cache;
  std::vector<pipeline::Example> examples;

  std::vector<const gen::ModelInput*> inputs(std::size_t n) const {
    std::vector<const gen::ModelInput*> out;
    for (std::size_t i = 0; i < n && i < examples.size(); ++i) out.push_back(&examples[i].input);
    return out;
  }
};

inline std::unique_ptr<Fixture> make_fixture(const std::string& data_dir, int samples, const gen::ModelConfig& config,
                                             std::uint64_t seed, int bpe_merges = 100,
                                             const corpus::SynthOptions& synth = {}) {
  auto f = std::make_unique<Fixture>();
  auto kg = kg::load_triples(data_dir + "/cskg.tsv");
  f->templates = corpus::read_templates(data_dir + "/templates.jsonl");
  f->raw = corpus::synth_corpus(f->templates, kg, samples, seed, synth);
  auto vocab = pipeline::build_training_vocab(f->raw, kg, bpe_merges);
  f->model = pipeline::create_model(config, 96, std::move(vocab), std::move(kg), seed);
  f->cache = std::make_unique<pipeline::GraphCache>(f->model->kg, f->model->vocab);
  f->examples = pipeline::prepare_examples(f->raw, *f->cache, f->model->vocab, f->model->max_len);
  return f;
}

inline gen::ModelConfig tiny_config() {
  gen::ModelConfig c;
  c.embedding = 6;
  c.hidden = 8;
  c.latent = 4;
  c.hops = 2;
  c.init_std = 0.5;
  return c;
}

struct ParamCheck {
  std::string name;
  double worst = 0.0;
  long checked = 0;
};

/// Central differences on named parameters against Tape gradients. `loss`
/// must be a deterministic function of the store. When per_param > 0 only
/// that many entries (chosen with `rng`) are checked per parameter. `floor`
/// bounds the denominator of the relative error; the roundoff of a central
/// difference is about eps * |loss| / h, so losses near 10 need ~1e-5.
template <typename LossFn>
std::vector<ParamCheck> check_parameter_gradients(nn::ParameterStore& store, LossFn loss, double h = 1e-5,
                                                  long per_param = 0, Rng* rng = nullptr, double floor = 1e-6) {
  store.zero_grad();
  {
    nn::Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<ParamCheck> out;
  for (nn::Parameter* p : store.all()) {
    ParamCheck c{p->name};
    const nn::Matrix analytic = p->grad.size() ? p->grad : nn::Matrix::Zero(p->value.rows(), p->value.cols());
    std::vector<Eigen::Index> entries;
    if (per_param > 0) {
      for (long k = 0; k < per_param; ++k) entries.push_back(static_cast<Eigen::Index>(rng->below(static_cast<std::uint64_t>(p->value.size()))));
    } else {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) entries.push_back(i);
    }
    for (Eigen::Index i : entries) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + h;
      double up, down;
      {
        nn::Tape t(false);
        up = loss(t).scalar();
      }
      x = saved - h;
      {
        nn::Tape t(false);
        down = loss(t).scalar();
      }
      x = saved;
      c.worst = std::max(c.worst, rel_error(analytic.data()[i], (up - down) / (2 * h), floor));
      ++c.checked;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace mwpgen::testing
