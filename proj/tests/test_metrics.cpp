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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mwpgen/error.hpp"
#include "mwpgen/metrics.hpp"
#include "mwpgen/rng.hpp"
#include "support/oracles.hpp"

using namespace mwpgen;
using metrics::Tokens;
using testing::oracle_bleu;
using testing::oracle_lcs;
using testing::random_tokens;

namespace {

Tokens toks(const std::string& s) { return metrics::tokenize(s); }

}  // namespace

TEST_CASE("bleu anchors") {
  std::vector<Tokens> ref{toks("a b c d f")};
  CHECK(metrics::bleu4(toks("a b c d e"), ref) == doctest::Approx(100.0 * std::pow(0.8 * 0.75 * (2.0 / 3) * 0.5, 0.25)).epsilon(1e-12));
  CHECK(metrics::bleu4(toks("a b c d e"), ref) == doctest::Approx(66.87).epsilon(1e-4));
  std::vector<Tokens> same{toks("the cat sat on the mat")};
  CHECK(metrics::bleu4(same[0], same) == doctest::Approx(100.0));
  std::vector<Tokens> other{toks("a b x c d")};
  const double low = metrics::bleu4(toks("a b y c e"), other);
  CHECK(low > 0.0);
  CHECK(low < 50.0);
  CHECK(metrics::bleu4({}, ref) == 0.0);
  CHECK(metrics::bleu4(toks("p q r s t u"), std::vector<Tokens>{toks("a b c d e f")}) < 1.0);
}

TEST_CASE("rouge-l anchors") {
  CHECK(metrics::rouge_l(toks("a b c d"), toks("a c b d")) == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(metrics::rouge_l(toks("a b"), toks("a b")) == doctest::Approx(100.0));
  CHECK(metrics::rouge_l(toks("a b"), toks("c d")) == 0.0);
}

TEST_CASE("metrics match brute-force oracles on random pairs") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Tokens c = random_tokens(rng, 1, 12, 4);
    std::vector<Tokens> refs;
    const int nref = static_cast<int>(rng.uniform_int(1, 3));
    for (int k = 0; k < nref; ++k) refs.push_back(random_tokens(rng, 1, 12, 4));
    CHECK(std::abs(metrics::bleu4(c, refs) - oracle_bleu(c, refs)) <= 1e-9);
    CHECK(metrics::lcs_length(c, refs[0]) == oracle_lcs(c, refs[0]));
    const double lcs = static_cast<double>(oracle_lcs(c, refs[0]));
    const double p = lcs / c.size(), r = lcs / refs[0].size();
    const double f = lcs == 0 ? 0.0 : 100.0 * 2 * p * r / (p + r);
    CHECK(std::abs(metrics::rouge_l(c, refs[0]) - f) <= 1e-9);
    auto reversed = refs;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(metrics::bleu4(c, refs) == metrics::bleu4(c, reversed));
  }
}

TEST_CASE("corpus bleu sums clipped counts") {
  std::vector<Tokens> cands{toks("a b c d e"), toks("x y z w")};
  std::vector<std::vector<Tokens>> refs{{toks("a b c d f")}, {toks("x y z w")}};
  // Matches 4+4, 3+3, 2+2, 1+1 over totals 5+4, 4+3, 3+2, 2+1.
  const double want = 100.0 * std::pow((8.0 / 9) * (6.0 / 7) * (4.0 / 5) * (2.0 / 3), 0.25);
  CHECK(metrics::corpus_bleu4(cands, refs) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("self-bleu") {
  Tokens s = toks("there are five cows on the farm");
  Tokens t = toks("how many wheels does each car have");
  std::vector<Tokens> same(4, s);
  CHECK(metrics::self_bleu(same) == doctest::Approx(100.0));
  std::vector<Tokens> mixed{s, s, t, t};
  CHECK(metrics::self_bleu(mixed) == doctest::Approx(100.0));
  std::vector<Tokens> disjoint{toks("a b c d"), toks("e f g h"), toks("i j k l"), toks("m n o p")};
  CHECK(metrics::self_bleu(disjoint) < 1.0);
  try {
    metrics::self_bleu(std::vector<Tokens>(3, s));
    FAIL("expected ContractError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kContract);
  }

  // Replacing a sample with a copy of another never lowers the score.
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Tokens> set;
    for (int k = 0; k < 4; ++k) set.push_back(random_tokens(rng, 4, 10, 6));
    const double before = metrics::self_bleu(set);
    set[3] = set[static_cast<std::size_t>(rng.below(3))];
    CHECK(metrics::self_bleu(set) >= before - 1e-12);
  }
}

TEST_CASE("evaluate report") {
  std::vector<std::vector<Tokens>> preds{{toks("a b c d e")}, {toks("x y z w")}};
  std::vector<std::vector<Tokens>> refs{{toks("a b c d e")}, {toks("x y z w")}};
  auto r = metrics::evaluate(preds, refs);
  CHECK(r.bleu4 == doctest::Approx(100.0));
  CHECK(r.rouge_l == doctest::Approx(100.0));
  CHECK_FALSE(r.self_bleu.has_value());
  preds[0] = std::vector<Tokens>(4, toks("a b c d e"));
  preds[1] = std::vector<Tokens>(4, toks("x y z w"));
  r = metrics::evaluate(preds, refs);
  CHECK(*r.self_bleu == doctest::Approx(100.0));
  CHECK(toks("Hello, world!") == Tokens{"Hello", ",", "world", "!"});
}
