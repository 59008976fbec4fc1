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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwpgen/cskg.hpp"
#include "mwpgen/equation.hpp"
#include "mwpgen/rng.hpp"
#include "mwpgen/vocab.hpp"

namespace mwpgen::corpus {

/// One dataset record as stored in .jsonl files.
struct RawSample {
  std::string equations;
  std::string topic;
  std::string bind_x;
  std::string bind_y;
  std::string text;
  friend bool operator==(const RawSample&, const RawSample&) = default;
};

std::vector<RawSample> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, std::span<const RawSample> samples);
std::string to_jsonl_line(const RawSample& s);

/// Slot token -> surface string.
using SlotMap = std::map<std::string, std::string>;

struct Delexed {
  std::string text;                       // raw text with slot tokens substituted
  SlotMap slots;
  std::vector<std::string> diagnostics;   // numbers / entity forms left verbatim
};

/// Plural surface form used when filling entity slots ("boat" -> "boats",
/// "dragonfly" -> "dragonflies", "bus" -> "buses").
std::string plural(const std::string& entity);

/// Replaces quantities equal to a slot value (leftmost first; equal values
/// resolved by slot order a, b, m, p, c, d, n, q) and bound entity mentions
/// (the lemma or its plural, case-insensitive) by slot tokens. A slot keeps
/// the surface of its first match; later mentions with a different surface
/// stay verbatim and are reported, which keeps relexicalization exact.
Delexed delexicalize(std::string_view text, const eq::LinearSystem& system, const kg::Binding& binding);

/// Substitutes every slot token; a slot without an entry raises MissingSlot.
std::string relexicalize(std::string_view text, const SlotMap& slots);
std::string relexicalize(std::span<const int> ids, const text::Vocab& vocab, const SlotMap& slots);

/// Slot tokens occurring in a delexicalized string, in order of appearance.
std::vector<std::string> slots_in(std::string_view text);

/// Slot map for generation: quantity slots from the system, entity slots
/// from the plural of each bound entity.
SlotMap generation_slots(const eq::LinearSystem& system, const kg::Binding& binding);

// --- templates ---------------------------------------------------------------

struct MwpTemplate {
  std::string text;   // with slot tokens as placeholders
  std::string shape;  // e.g. "x+y=<m>; <c>x-<d>y=<n>"
  std::string topic;
};

/// Reads {template, shape, topic} lines; checks each placeholder against the
/// shape's slots.
std::vector<MwpTemplate> read_templates(const std::filesystem::path& path);
void validate_template(const MwpTemplate& t);

/// Entities attached to a topic by belong_to, sorted.
std::vector<std::string> topic_entities(const kg::KnowledgeGraph& kg, const std::string& topic);

struct SynthOptions {
  int coef_min = 2;
  int coef_max = 9;
  int solution_min = 1;
  int solution_max = 30;
  /// When non-empty, only these shapes are generated; a shape without a
  /// template raises TemplateGap.
  std::vector<std::string> shapes;
  /// When non-empty, only templates of these topics are used.
  std::vector<std::string> topics;
  /// Renders each sampled problem with every template of its shape and topic
  /// instead of one, so the corpus holds several surface forms per input.
  bool all_variants = false;
};

/// Samples a random solvable system of the given shape with positive integer
/// solution and pairwise distinct slot values.
eq::LinearSystem sample_system(const std::string& shape, const SynthOptions& options, Rng& rng);

std::vector<RawSample> synth_corpus(std::span<const MwpTemplate> templates, const kg::KnowledgeGraph& kg, int count,
                                    std::uint64_t seed, const SynthOptions& options = {});

/// Template baseline: fills the first template with the system's shape and
/// topic. Throws TemplateGap naming the shape when none matches.
std::string template_baseline(std::span<const MwpTemplate> templates, const eq::LinearSystem& system,
                              const std::string& topic, const kg::Binding& binding);

struct Split {
  std::vector<RawSample> train, dev, test;
};

/// Seeded shuffle, then dev and test take round(fraction * n) items each;
/// items keep their original relative order inside each part.
Split split(std::span<const RawSample> data, double dev_fraction, double test_fraction, std::uint64_t seed);

}  // namespace mwpgen::corpus
