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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mwpgen.h"
#include "mwpgen/config.hpp"
#include "mwpgen/encoder.hpp"
#include "mwpgen/metrics.hpp"
#include "support/fixture.hpp"
#include "support/oracles.hpp"

using namespace mwpgen;
using nlohmann::ordered_json;
using nn::Matrix;
namespace fs = std::filesystem;

namespace {

const std::string kSource = MWPGEN_SOURCE_DIR;
const std::string kData = kSource + "/data";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

class Stopwatch {
 public:
  double wall() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_).count(); }
  double cpu() const { return static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC; }

 private:
  std::chrono::steady_clock::time_point wall_ = std::chrono::steady_clock::now();
  std::clock_t cpu_ = std::clock();
};

/// Collects failed checks inside one criterion.
struct Checks {
  int failed = 0;
  std::string first;
  void operator()(bool ok, const std::string& what) {
    if (ok) return;
    if (failed++ == 0) first = what;
  }
  bool ok() const { return failed == 0; }
  std::string summary() const { return failed == 0 ? "" : std::to_string(failed) + " failed, first: " + first; }
};

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Takes the output slot by address: it must be read after the call returns.
std::string call(mwpgen_status s, char** out) {
  if (s != MWPGEN_OK) {
    throw std::runtime_error(std::string(mwpgen_status_name(s)) + ": " + mwpgen_last_error());
  }
  std::string r = *out;
  mwpgen_string_free(*out);
  *out = nullptr;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The shipped overfit config, with outputs redirected below `root`.
ordered_json overfit_config(const fs::path& root) {
  std::ifstream in(kSource + "/configs/overfit.json");
  ordered_json c = ordered_json::parse(in);
  c["paths"]["data_dir"] = (root / "data").string();
  c["paths"]["checkpoint"] = (root / "model").string();
  c["paths"]["cskg"] = kData + "/cskg.tsv";
  c["paths"]["templates"] = kData + "/templates.jsonl";
  return c;
}

// --- 1 -------------------------------------------------------------------------

Outcome gradient_integrity() {
  Stopwatch sw;
  auto f = testing::make_fixture(kData, 2, testing::tiny_config(), 26, 20);
  auto& m = *f->model;
  const auto inputs = f->inputs(2);
  long tokens = 0;
  for (const auto* in : inputs) tokens += static_cast<long>(in->target.size());
  const auto checks = testing::check_parameter_gradients(m.params, [&](nn::Tape& t) {
    gen::LossOptions o;
    o.teacher_forcing = 1.0;
    o.kl_weight = 1.0;
    Rng rng(3);
    return gen::training_loss(t, m.params, m.config, inputs, o, rng).loss;
  }, 1e-5, 0, nullptr, 1e-5);
  double worst = 0.0;
  std::string worst_name;
  long entries = 0;
  for (const auto& c : checks) {
    entries += c.checked;
    if (c.worst > worst) {
      worst = c.worst;
      worst_name = c.name;
    }
  }
  const double secs = sw.wall();
  const bool pass = worst < 1e-4 && checks.size() == m.params.size() && secs < 120.0;
  return {pass, std::to_string(checks.size()) + " parameters, " + std::to_string(entries) + " entries, " +
                    std::to_string(tokens) + " target tokens; worst rel err " + num(worst, 3) + " (" + worst_name +
                    ") in " + num(secs, 3) + " s"};
}

// --- 2 -------------------------------------------------------------------------

Outcome graph_oracles() {
  Rng rng(20260611);
  Checks check;
  double worst_row = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_graph(rng);
    const std::size_t v = g.nodes.size(), e = g.edges.size();
    const auto levi = graph::levi_transform(g);
    check(levi.nodes.size() == v + 2 * e, "|V^t| = |V| + 2|E|");
    check(levi.edges.size() == 4 * e + levi.nodes.size(), "|E^t| = 4|E| + |V^t|");
    check(graph::base_levi_transform(g).nodes.size() == v + e, "base |V^t| = |V| + |E|");
    const Matrix a = graph::row_normalize(levi);
    const auto in = testing::in_neighbors(levi);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      worst_row = std::max(worst_row, std::abs(a.row(r).sum() - 1.0));
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double want = in[r].count(static_cast<int>(c)) ? 1.0 / static_cast<double>(in[r].size()) : 0.0;
        check(a(r, c) == want, "adjacency entry differs from 1/in-degree");
      }
    }
  }
  check(worst_row <= 1e-12, "row sum off by more than 1e-12");
  return {check.ok(), "200 graphs; max |row sum - 1| = " + num(worst_row, 3) + (check.ok() ? "" : "; " + check.summary())};
}

// --- 3 -------------------------------------------------------------------------

Outcome analytic_anchors() {
  Checks check;
  // KL(N(1,1) || N(0,1)) per dimension
  const int dims = 7;
  gen::GaussianValue q{Matrix::Ones(1, dims), Matrix::Zero(1, dims)};
  gen::GaussianValue p{Matrix::Zero(1, dims), Matrix::Zero(1, dims)};
  const double kl_per_dim = gen::kl_divergence(q, p)[0] / dims;
  check(std::abs(kl_per_dim - 0.5) <= 1e-12, "KL per dim != 0.5");

  // zero-weight GGNN: g_t = 2^-t g_0
  Rng rng(1);
  nn::ParameterStore store;
  store.add("embedding", random_matrix(7, 5, rng));
  encoder::register_ggnn(store, "g", 5, 0.3, rng);
  for (auto* param : store.all()) {
    if (param->name != "embedding") param->value.setZero();
  }
  Matrix path = Matrix::Zero(4, 4);
  for (int v = 0; v < 4; ++v) {
    path(v, v) = 1.0;
    if (v > 0) path(v, v - 1) = 1.0;
    path.row(v) /= path.row(v).sum();
  }
  const auto batch = encoder::make_batch({path}, {{1, 3, 5, 6}});
  double ggnn_err = 0.0;
  for (int t = 0; t <= 5; ++t) {
    nn::Tape tape(false);
    const auto enc =
        encoder::ggnn_encode(tape, tape.param(store.at("embedding")), encoder::bind_ggnn(tape, store, "g"), batch, t);
    ggnn_err = std::max(ggnn_err, (enc.gn.value() - enc.g0.value() * std::ldexp(1.0, -t)).cwiseAbs().maxCoeff());
  }
  check(ggnn_err == 0.0, "zero-weight GGNN not exactly 2^-t");

  // planner with W_beta = 0, plus attention and output normalization
  auto f = testing::make_fixture(kData, 4, testing::tiny_config(), 23);
  auto& m = *f->model;
  m.params.at("planner.W_beta").value.setZero();
  nn::Tape tape(false);
  const auto w = gen::bind(tape, m.params, m.config);
  const auto inputs = f->inputs(3);
  const auto cond = gen::encode_conditions(tape, w, m.config, inputs);
  const auto ve = gen::make_view(cond.eq, cond.eq_graph);
  const auto vk = gen::make_view(cond.kg, cond.kg_graph);
  const auto step = gen::decode_step(w, tape.constant(random_matrix(3, m.config.hidden, rng)),
                                     nn::embed_lookup(w.embedding, std::vector<int>{1, 1, 1}), ve, vk);
  double norm_err = 0.0;
  const Matrix probs = nn::softmax_values(step.logits.value());
  for (int r = 0; r < 3; ++r) {
    check(step.plan.beta.value()(r, 0) == 0.5, "beta != 0.5 with zero W_beta");
    double se = 0, sk = 0;
    for (std::size_t i = 0; i < ve.segment.size(); ++i) se += ve.segment[i] == r ? step.plan.alpha_e.value()(i, 0) : 0.0;
    for (std::size_t i = 0; i < vk.segment.size(); ++i) sk += vk.segment[i] == r ? step.plan.alpha_k.value()(i, 0) : 0.0;
    norm_err = std::max({norm_err, std::abs(se - 1), std::abs(sk - 1), std::abs(probs.row(r).sum() - 1)});
  }
  check(norm_err <= 1e-6, "attention or softmax does not sum to 1");
  return {check.ok(), "KL/dim " + num(kl_per_dim, 15) + ", GGNN max err " + num(ggnn_err, 3) +
                          ", beta 0.5, normalization err " + num(norm_err, 3) +
                          (check.ok() ? "" : "; " + check.summary())};
}

// --- 4 -------------------------------------------------------------------------

Outcome solver_fidelity() {
  Checks check;
  auto anchor = eq::parse_system("x+y=27; 2x+4y=86");
  const auto sol = eq::solve_system(anchor);
  check(sol.x == 11 && sol.y == 16, "x+y=27, 2x+4y=86 does not give (11, 16)");
  const auto kg = kg::load_triples(kData + "/cskg.tsv");
  const auto templates = corpus::read_templates(kData + "/templates.jsonl");
  const auto data = corpus::synth_corpus(templates, kg, 1000, 4, {});
  std::set<std::string> shapes;
  for (const auto& s : data) {
    auto sys = eq::parse_system(s.equations);
    check(eq::serialize(eq::parse_system(eq::serialize(sys))) == s.equations, "serialize/parse round trip");
    const auto r = eq::solve_system(sys);
    check(eq::satisfies(sys, r.x, r.y), "solution does not substitute back: " + s.equations);
    shapes.insert(eq::shape_of(sys));
  }
  return {check.ok(), "anchor (" + eq::to_string(sol.x) + ", " + eq::to_string(sol.y) + "); 1000 systems over " +
                          std::to_string(shapes.size()) + " shapes substitute exactly" +
                          (check.ok() ? "" : "; " + check.summary())};
}

// --- 5, 6, 8 (model part) -------------------------------------------------------

struct OverfitRun {
  std::unique_ptr<pipeline::Model> model;
  std::vector<pipeline::Example> examples;
  std::string error;
  double cpu = 0.0, wall = 0.0;
  long steps = 0;
};

OverfitRun run_overfit(const fs::path& root) {
  OverfitRun run;
  try {
    const ordered_json config = overfit_config(root);
    Stopwatch sw;
    char* out = nullptr;
    call(mwpgen_synth(config.dump().c_str(), &out), &out);
    out = nullptr;
    const auto summary = ordered_json::parse(call(mwpgen_train(config.dump().c_str(), nullptr, nullptr, &out), &out));
    run.cpu = sw.cpu();
    run.wall = sw.wall();
    run.steps = summary.at("steps").get<long>();
    run.model = pipeline::load_model(root / "model" / "last");
    const auto raw = corpus::read_dataset(root / "data" / "train.jsonl");
    pipeline::GraphCache cache(run.model->kg, run.model->vocab);
    run.examples = pipeline::prepare_examples(raw, cache, run.model->vocab, run.model->max_len);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

Outcome overfit_surrogate(const OverfitRun& run) {
  if (!run.error.empty()) return {false, run.error};
  auto& m = *run.model;
  const auto stats = pipeline::evaluate_loss(m, run.examples, 32);
  std::vector<const gen::ModelInput*> inputs;
  for (const auto& e : run.examples) inputs.push_back(&e.input);
  const auto decoded = gen::greedy_decode_batch(m.params, m.config, inputs, true, m.max_len);
  std::vector<metrics::Tokens> cands;
  std::vector<std::vector<metrics::Tokens>> refs;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    cands.push_back(metrics::tokenize(m.vocab.decode(decoded[i])));
    refs.push_back({metrics::tokenize(m.vocab.decode(run.examples[i].input.target))});
  }
  const double bleu = metrics::corpus_bleu4(cands, refs);
  std::set<std::string> shapes;
  for (const auto& e : run.examples) shapes.insert(eq::shape_of(e.system));
  const bool pass = run.examples.size() == 64 && run.steps <= 2000 && stats.accuracy >= 0.99 && bleu >= 90.0 &&
                    run.cpu < 1800.0;
  return {pass, std::to_string(run.examples.size()) + " samples, " + std::to_string(shapes.size()) + " shapes, " +
                    std::to_string(run.steps) + " steps; teacher-forced acc " + num(100 * stats.accuracy, 5) +
                    "%, train NLL " + num(stats.nll, 3) + "/token, greedy BLEU-4 " + num(bleu, 4) + "; " +
                    num(run.cpu / 60.0, 3) + " CPU min (" + num(run.wall / 60.0, 3) + " wall)"};
}

Outcome diversity(const OverfitRun& run) {
  if (!run.error.empty()) return {false, "no model: " + run.error};
  std::set<std::string> seen;
  int inputs = 0, diverse = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < run.examples.size(); ++i) {
    const auto& raw = run.examples[i].raw;
    if (!seen.insert(raw.equations + "|" + raw.topic + "|" + raw.bind_x + "|" + raw.bind_y).second) continue;
    pipeline::GenerateRequest req;
    req.equations = raw.equations;
    req.topic = raw.topic;
    req.binding = {raw.bind_x, raw.bind_y};
    req.samples = 4;
    req.seed = 1000 + i;
    req.max_len = run.model->max_len;
    const auto result = pipeline::generate(*run.model, req);
    std::vector<metrics::Tokens> samples;
    for (const auto& o : result.outputs) samples.push_back(metrics::tokenize(o.text));
    const double sb = metrics::self_bleu(samples);
    ++inputs;
    diverse += sb < 100.0;
    mean += sb;
  }
  const double frac = inputs ? static_cast<double>(diverse) / inputs : 0.0;
  return {frac >= 0.8, std::to_string(diverse) + "/" + std::to_string(inputs) + " inputs with Self-BLEU < 100 (" +
                           num(100 * frac, 3) + "%), mean Self-BLEU " + num(inputs ? mean / inputs : 0.0, 4)};
}

// --- 7 -------------------------------------------------------------------------

Outcome metric_oracles() {
  Checks check;
  Rng rng(99);
  double worst_bleu = 0.0, worst_rouge = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = testing::random_tokens(rng, 1, 12, 4);
    std::vector<metrics::Tokens> refs;
    const int nref = static_cast<int>(rng.uniform_int(1, 3));
    for (int k = 0; k < nref; ++k) refs.push_back(testing::random_tokens(rng, 1, 12, 4));
    worst_bleu = std::max(worst_bleu, std::abs(metrics::bleu4(c, refs) - testing::oracle_bleu(c, refs)));
    const double lcs = static_cast<double>(testing::oracle_lcs(c, refs[0]));
    const double p = lcs / c.size(), r = lcs / refs[0].size();
    const double f = lcs == 0 ? 0.0 : 100.0 * 2 * p * r / (p + r);
    worst_rouge = std::max(worst_rouge, std::abs(metrics::rouge_l(c, refs[0]) - f));
  }
  check(worst_bleu <= 1e-9, "BLEU differs from brute force");
  check(worst_rouge <= 1e-9, "ROUGE-L differs from brute force");
  const double anchor_bleu = metrics::bleu4(metrics::tokenize("a b c d e"), std::vector<metrics::Tokens>{metrics::tokenize("a b c d f")});
  const double anchor_rouge = metrics::rouge_l(metrics::tokenize("a b c d"), metrics::tokenize("a c b d"));
  check(std::abs(anchor_bleu - 66.87) < 0.005, "BLEU anchor");
  check(std::abs(anchor_rouge - 75.0) < 1e-9, "ROUGE-L anchor");
  return {check.ok(), "20 pairs: max BLEU diff " + num(worst_bleu, 3) + ", max ROUGE-L diff " + num(worst_rouge, 3) +
                          "; anchors " + num(anchor_bleu, 6) + " and " + num(anchor_rouge, 6) +
                          (check.ok() ? "" : "; " + check.summary())};
}

// --- 8 -------------------------------------------------------------------------

Outcome pipeline_round_trip(const OverfitRun& run) {
  Checks check;
  const auto kg = kg::load_triples(kData + "/cskg.tsv");
  const auto templates = corpus::read_templates(kData + "/templates.jsonl");
  const auto data = corpus::synth_corpus(templates, kg, 1000, 8, {});
  int identical = 0;
  for (const auto& s : data) {
    auto sys = eq::parse_system(s.equations);
    eq::solve_system(sys);
    const auto d = corpus::delexicalize(s.text, sys, {s.bind_x, s.bind_y});
    identical += corpus::relexicalize(d.text, d.slots) == s.text && d.diagnostics.empty();
  }
  check(identical == static_cast<int>(data.size()), "delexicalize/relexicalize not the identity");

  // a trained model when available, else a random tiny one
  std::unique_ptr<testing::Fixture> fallback;
  pipeline::Model* model = run.model.get();
  std::vector<const gen::ModelInput*> inputs;
  if (model != nullptr) {
    for (const auto& e : run.examples) inputs.push_back(&e.input);
  } else {
    fallback = testing::make_fixture(kData, 50, testing::tiny_config(), 8);
    model = fallback->model.get();
    inputs = fallback->inputs(50);
  }
  Rng rng(8);
  int equal = 0, tried = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& in = *inputs[static_cast<std::size_t>(i) % inputs.size()];
    const auto prior = gen::prior_of(model->params, model->config, in);
    Matrix z = prior.mu;
    for (Eigen::Index k = 0; k < z.size(); ++k) z(0, k) += std::exp(prior.log_sigma(0, k)) * rng.normal();
    const auto greedy = gen::greedy_decode(model->params, model->config, in, z, model->max_len);
    const auto beam = gen::beam_search(model->params, model->config, in, z, 1, model->max_len);
    ++tried;
    equal += beam.size() == 1 && beam[0].tokens == greedy.tokens;
  }
  check(equal == tried, "beam width 1 differs from greedy");
  return {check.ok(), "round trip " + std::to_string(identical) + "/" + std::to_string(data.size()) +
                          " samples; beam1 == greedy on " + std::to_string(equal) + "/" + std::to_string(tried) +
                          " inputs" + (model == run.model.get() ? " (trained model)" : " (untrained model)")};
}

// --- 9 -------------------------------------------------------------------------

struct TrainCapture {
  std::vector<std::string> lines;
};

void capture(const char* line, void* user) { static_cast<TrainCapture*>(user)->lines.emplace_back(line); }

Outcome determinism(const fs::path& root, const OverfitRun& run) {
  Checks check;
  ordered_json config = overfit_config(root / "a");
  config["train"]["max_steps"] = 40;
  config["train"]["eval_every"] = 20;
  config["train"]["teacher_forcing"] = 1.0;
  char* out = nullptr;
  call(mwpgen_synth(config.dump().c_str(), &out), &out);

  std::vector<TrainCapture> logs(2);
  std::vector<std::string> params(2);
  for (int k = 0; k < 2; ++k) {
    ordered_json c = config;
    c["paths"]["checkpoint"] = (root / ("run" + std::to_string(k))).string();
    out = nullptr;
    call(mwpgen_train(c.dump().c_str(), capture, &logs[k], &out), &out);
    params[k] = read_file(root / ("run" + std::to_string(k)) / "last" / "params.bin");
  }
  check(logs[0].lines == logs[1].lines, "training logs differ");
  check(!params[0].empty() && params[0] == params[1], "trained parameters differ");

  const fs::path model_dir = run.model ? root.parent_path() / "overfit" / "model" : root / "run0";
  std::vector<std::string> generations(2);
  for (int k = 0; k < 2; ++k) {
    mwpgen_model* model = nullptr;
    const mwpgen_status s = mwpgen_model_load(model_dir.string().c_str(), &model);
    if (s != MWPGEN_OK) throw std::runtime_error(mwpgen_last_error());
    out = nullptr;
    generations[k] = call(mwpgen_generate(model, "x+y=27; 2x+4y=86", "livestock", "chicken", "rabbit", 4, 77, 5,
                                          100, &out),
                          &out);
    mwpgen_model_free(model);
  }
  check(generations[0] == generations[1], "generation differs across runs");
  return {check.ok(), std::to_string(logs[0].lines.size()) + " log lines and " + std::to_string(params[0].size()) +
                          " parameter bytes identical across two training runs; 4 generations identical across two "
                          "loads" +
                          (check.ok() ? "" : "; " + check.summary())};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "mwpgen_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    Stopwatch sw;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": " << o.detail << " ("
              << num(sw.wall(), 3) << " s)" << std::endl;
  };

  report(1, "gradient integrity", gradient_integrity);
  report(2, "graph oracles", graph_oracles);
  report(3, "analytic anchors", analytic_anchors);
  report(4, "solver fidelity", solver_fidelity);
  OverfitRun run;
  report(5, "overfit surrogate", [&] {
    run = run_overfit(root / "overfit");
    return overfit_surrogate(run);
  });
  report(6, "diversity surrogate", [&] { return diversity(run); });
  report(7, "metric oracles", metric_oracles);
  report(8, "pipeline round trip", [&] { return pipeline_round_trip(run); });
  report(9, "determinism", [&] { return determinism(root / "determinism", run); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
