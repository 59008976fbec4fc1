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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mwpgen/levi.hpp"
#include "mwpgen/metrics.hpp"
#include "mwpgen/rng.hpp"

// Independent reference computations shared by the unit tests and the
// acceptance run.
namespace mwpgen::testing {

using graph::LabeledGraph;
using metrics::Tokens;

inline LabeledGraph random_graph(Rng& rng) {
  LabeledGraph g;
  const int v = static_cast<int>(rng.uniform_int(1, 50));
  for (int i = 0; i < v; ++i) g.nodes.push_back("n" + std::to_string(i));
  const int e = static_cast<int>(rng.uniform_int(0, 2 * v));
  for (int k = 0; k < e; ++k) {
    const int h = static_cast<int>(rng.below(v));
    const int t = static_cast<int>(rng.below(v));
    g.edges.push_back({h, "r" + std::to_string(rng.below(4)), t});
  }
  return g;
}

// In-degree counted straight from the edge list, independent of row_normalize.
inline std::vector<std::set<int>> in_neighbors(const graph::LeviGraph& levi) {
  std::vector<std::set<int>> in(levi.nodes.size());
  for (const auto& e : levi.edges) in[e.to].insert(e.from);
  return in;
}

// Brute-force BLEU: n-grams compared by scanning every position.
inline double oracle_bleu(const Tokens& c, const std::vector<Tokens>& refs) {
  if (c.empty()) return 0.0;
  auto occurrences = [](const Tokens& t, const Tokens& g) {
    long k = 0;
    for (std::size_t i = 0; i + g.size() <= t.size(); ++i) {
      bool eq = true;
      for (std::size_t j = 0; j < g.size(); ++j) eq = eq && t[i + j] == g[j];
      k += eq;
    }
    return k;
  };
  double log_p = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    long match = 0, total = 0;
    std::vector<Tokens> seen;
    for (std::size_t i = 0; i + n <= c.size(); ++i) {
      Tokens g(c.begin() + static_cast<long>(i), c.begin() + static_cast<long>(i + n));
      ++total;
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      long ref_max = 0;
      for (const auto& r : refs) ref_max = std::max(ref_max, occurrences(r, g));
      match += std::min(occurrences(c, g), ref_max);
    }
    if (n == 1 && match == 0) return 0.0;
    double p = match == 0 ? 1.0 / (total + 1.0) : static_cast<double>(match) / total;
    log_p += std::log(p) / 4.0;
  }
  std::size_t r = refs[0].size();
  for (const auto& ref : refs) {
    const auto d = [&](std::size_t len) { return len > c.size() ? len - c.size() : c.size() - len; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  const double bp = c.size() > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c.size());
  return 100.0 * bp * std::exp(log_p);
}

// Longest common subsequence by enumerating every subsequence of a.
inline std::size_t oracle_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

inline Tokens random_tokens(Rng& rng, int min_len, int max_len, int alphabet) {
  Tokens t(static_cast<std::size_t>(rng.uniform_int(min_len, max_len)));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + rng.below(static_cast<std::uint64_t>(alphabet))));
  return t;
}

}  // namespace mwpgen::testing
