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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mwpgen::metrics {

using Tokens = std::vector<std::string>;

/// Whitespace split with punctuation marks as separate tokens.
Tokens tokenize(std::string_view text);

/// Clipped n-gram statistics of one candidate against its references.
struct BleuStats {
  std::array<long, 4> matches{};
  std::array<long, 4> totals{};
  long candidate_length = 0;
  long reference_length = 0;  // closest reference length, shorter on ties

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& candidate, std::span<const Tokens> references);

/// BLEU-4 in [0, 100] from (possibly summed) statistics. A zero precision
/// for n >= 2 is smoothed to (0 + 1) / (total + 1); a zero unigram
/// precision gives 0.
double bleu_from_stats(const BleuStats& s);

/// Sentence BLEU-4; an empty candidate scores 0.
double bleu4(const Tokens& candidate, std::span<const Tokens> references);
/// Corpus BLEU-4 from summed clipped counts.
double corpus_bleu4(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
/// ROUGE-L F1 in [0, 100]; 0 when either side is empty.
double rouge_l(const Tokens& candidate, const Tokens& reference);

/// Mean BLEU-4 of each of exactly four samples against the other three.
double self_bleu(std::span<const Tokens> samples);

struct SampleScore {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  std::optional<double> self_bleu;
};

struct EvalReport {
  double bleu4 = 0.0;    // corpus level, first sample of each input
  double rouge_l = 0.0;  // mean over inputs
  std::optional<double> self_bleu;  // mean over inputs with four samples
  std::vector<SampleScore> samples;
};

/// predictions[i] holds one or four samples for input i; references[i] its
/// reference texts.
EvalReport evaluate(const std::vector<std::vector<Tokens>>& predictions,
                    const std::vector<std::vector<Tokens>>& references);

}  // namespace mwpgen::metrics
