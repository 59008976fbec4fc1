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

#include "mwpgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <map>

#include "mwpgen/error.hpp"

namespace mwpgen::metrics {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, long> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<Gram, long> counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++counts[Gram(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))];
  return counts;
}

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references) {
  require(!references.empty(), ErrorCode::kContract, "BLEU needs at least one reference");
  BleuStats s;
  s.candidate_length = static_cast<long>(candidate.size());
  long best = -1;
  for (const auto& r : references) {
    const long len = static_cast<long>(r.size());
    const long diff = std::labs(len - s.candidate_length);
    const long best_diff = std::labs(best - s.candidate_length);
    if (best < 0 || diff < best_diff || (diff == best_diff && len < best)) best = len;
  }
  s.reference_length = best;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    std::map<Gram, long> max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    for (const auto& [g, c] : cand) {
      auto it = max_ref.find(g);
      s.matches[n - 1] += std::min(c, it == max_ref.end() ? 0L : it->second);
      s.totals[n - 1] += c;
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  if (s.candidate_length == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double m = static_cast<double>(s.matches[n]);
    double t = static_cast<double>(s.totals[n]);
    if (s.matches[n] == 0) {
      m += 1.0;
      t += 1.0;
    }
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(s.candidate_length);
  const double r = static_cast<double>(s.reference_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double bleu4(const Tokens& candidate, std::span<const Tokens> references) {
  if (candidate.empty()) return 0.0;
  return bleu_from_stats(bleu_stats(candidate, references));
}

double corpus_bleu4(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references) {
  require(candidates.size() == references.size(), ErrorCode::kContract, "candidate and reference counts differ");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += bleu_stats(candidates[i], references[i]);
  return bleu_from_stats(total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 100.0 * 2.0 * p * r / (p + r);
}

double self_bleu(std::span<const Tokens> samples) {
  require(samples.size() == 4, ErrorCode::kContract,
          "Self-BLEU needs exactly 4 samples, got " + std::to_string(samples.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<Tokens> rest;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) rest.push_back(samples[j]);
    }
    total += bleu4(samples[i], rest);
  }
  return total / 4.0;
}

EvalReport evaluate(const std::vector<std::vector<Tokens>>& predictions,
                    const std::vector<std::vector<Tokens>>& references) {
  require(predictions.size() == references.size(), ErrorCode::kContract,
          "predictions cover " + std::to_string(predictions.size()) + " inputs but references cover " +
              std::to_string(references.size()));
  EvalReport report;
  std::vector<Tokens> firsts;
  double rouge_sum = 0.0, self_sum = 0.0;
  int self_count = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    require(!predictions[i].empty() && !references[i].empty(), ErrorCode::kContract,
            "input " + std::to_string(i) + " has no prediction or reference");
    SampleScore s;
    const Tokens& cand = predictions[i].front();
    firsts.push_back(cand);
    s.bleu4 = bleu4(cand, references[i]);
    for (const auto& r : references[i]) s.rouge_l = std::max(s.rouge_l, rouge_l(cand, r));
    rouge_sum += s.rouge_l;
    if (predictions[i].size() == 4) {
      s.self_bleu = self_bleu(predictions[i]);
      self_sum += *s.self_bleu;
      ++self_count;
    }
    report.samples.push_back(s);
  }
  if (!predictions.empty()) {
    report.bleu4 = corpus_bleu4(firsts, references);
    report.rouge_l = rouge_sum / static_cast<double>(predictions.size());
  }
  if (self_count > 0) report.self_bleu = self_sum / self_count;
  return report;
}

}  // namespace mwpgen::metrics
