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

#include "mwpgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "mwpgen/error.hpp"

namespace mwpgen::corpus {

using eq::Rational;

// --- dataset files -------------------------------------------------------------

std::string to_jsonl_line(const RawSample& s) {
  nlohmann::ordered_json j;
  j["equations"] = s.equations;
  j["topic"] = s.topic;
  j["bind_x"] = s.bind_x;
  j["bind_y"] = s.bind_y;
  j["text"] = s.text;
  return j.dump();
}

std::vector<RawSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open dataset " + path.string());
  std::vector<RawSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
    RawSample s;
    auto field = [&](const char* name, std::string& dst) {
      if (!j.is_object() || !j.contains(name) || !j[name].is_string()) {
        fail(ErrorCode::kParse, where + ": missing string field '" + name + "'");
      }
      dst = j[name].get<std::string>();
    };
    field("equations", s.equations);
    field("topic", s.topic);
    field("bind_x", s.bind_x);
    field("bind_y", s.bind_y);
    field("text", s.text);
    out.push_back(std::move(s));
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const RawSample> samples) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write dataset " + path.string());
  for (const auto& s : samples) out << to_jsonl_line(s) << '\n';
  require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

// --- delexicalization ------------------------------------------------------------

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

bool boundary_before(std::string_view text, std::size_t i) { return i == 0 || !is_word_char(text[i - 1]); }
bool boundary_after(std::string_view text, std::size_t end) { return end >= text.size() || !is_word_char(text[end]); }

/// Length of the slot token starting at i, or 0.
std::size_t slot_token_at(std::string_view text, std::size_t i) {
  if (text[i] != '<') return 0;
  for (const auto& s : text::slot_tokens()) {
    if (text.compare(i, s.size(), s) == 0) return s.size();
  }
  return 0;
}

}  // namespace

std::string plural(const std::string& entity) {
  if (entity.empty()) return entity;
  auto ends = [&](std::string_view suf) {
    return entity.size() >= suf.size() && entity.compare(entity.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("y") && entity.size() >= 2 && std::string("aeiou").find(entity[entity.size() - 2]) == std::string::npos) {
    return entity.substr(0, entity.size() - 1) + "ies";
  }
  if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) return entity + "es";
  return entity + "s";
}

Delexed delexicalize(std::string_view text, const eq::LinearSystem& system, const kg::Binding& binding) {
  Delexed out;
  const auto slot_values = eq::slot_values(system);
  std::set<std::string> used;

  struct Form {
    std::string surface;
    std::string slot;
  };
  std::vector<Form> forms;
  for (const auto& [entity, slot] : {std::pair{binding.x, std::string(kg::kXEntityToken)},
                                     std::pair{binding.y, std::string(kg::kYEntityToken)}}) {
    if (entity.empty()) continue;
    forms.push_back({plural(entity), slot});
    forms.push_back({entity, slot});
  }
  std::stable_sort(forms.begin(), forms.end(), [](const Form& a, const Form& b) { return a.surface.size() > b.surface.size(); });

  auto emit_slot = [&](const std::string& slot, std::string_view surface) {
    auto it = out.slots.find(slot);
    if (it == out.slots.end()) {
      out.slots.emplace(slot, std::string(surface));
    } else if (it->second != surface) {
      out.diagnostics.push_back("'" + std::string(surface) + "' left verbatim: " + slot + " already stands for '" +
                                it->second + "'");
      out.text += surface;
      return;
    }
    out.text += slot;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (boundary_before(text, i) && std::isalpha(static_cast<unsigned char>(text[i]))) {
      bool matched = false;
      for (const auto& f : forms) {
        const std::size_t end = i + f.surface.size();
        if (end <= text.size() && iequal(text.substr(i, f.surface.size()), f.surface) && boundary_after(text, end)) {
          emit_slot(f.slot, text.substr(i, f.surface.size()));
          i = end;
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (std::isdigit(static_cast<unsigned char>(text[i])) && boundary_before(text, i) && (i == 0 || text[i - 1] != '.')) {
      std::size_t end = i;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      if (end + 1 < text.size() && text[end] == '.' && std::isdigit(static_cast<unsigned char>(text[end + 1]))) {
        ++end;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      }
      const std::string_view surface = text.substr(i, end - i);
      if (!boundary_after(text, end)) {
        out.text += surface;
        i = end;
        continue;
      }
      const Rational value = eq::parse_number(surface);
      const eq::SlotValue* pick = nullptr;
      for (const auto& sv : slot_values) {
        if (sv.value == value && !used.count(sv.slot)) {
          pick = &sv;
          break;
        }
      }
      if (pick == nullptr) {
        for (const auto& sv : slot_values) {
          if (sv.value == value) {
            pick = &sv;
            break;
          }
        }
      }
      if (pick == nullptr) {
        out.diagnostics.push_back("number " + std::string(surface) + " matches no equation quantity");
        out.text += surface;
      } else {
        used.insert(pick->slot);
        emit_slot(pick->slot, surface);
      }
      i = end;
      continue;
    }
    // Copy the rest of a word in one go so entity matching only starts at word boundaries.
    std::size_t end = i + 1;
    if (is_word_char(text[i])) {
      while (end < text.size() && is_word_char(text[end])) ++end;
    }
    out.text += text.substr(i, end - i);
    i = end;
  }
  return out;
}

std::string relexicalize(std::string_view text, const SlotMap& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t len = slot_token_at(text, i);
    if (len == 0) {
      out += text[i++];
      continue;
    }
    const std::string token(text.substr(i, len));
    auto it = slots.find(token);
    if (it == slots.end()) fail(ErrorCode::kMissingSlot, "no value for slot " + token);
    out += it->second;
    i += len;
  }
  return out;
}

std::string relexicalize(std::span<const int> ids, const text::Vocab& vocab, const SlotMap& slots) {
  return relexicalize(vocab.decode(ids), slots);
}

std::vector<std::string> slots_in(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = slot_token_at(text, i);
    if (len == 0) {
      ++i;
      continue;
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

SlotMap generation_slots(const eq::LinearSystem& system, const kg::Binding& binding) {
  SlotMap m;
  for (const auto& sv : eq::slot_values(system)) m[sv.slot] = eq::to_string(sv.value);
  m[kg::kXEntityToken] = plural(binding.x);
  m[kg::kYEntityToken] = plural(binding.y);
  return m;
}

// --- templates ------------------------------------------------------------------

namespace {

/// Parses a shape by reading every slot token as the number 1.
eq::LinearSystem probe_shape(const std::string& shape) {
  std::string probe;
  for (std::size_t i = 0; i < shape.size();) {
    const std::size_t len = slot_token_at(shape, i);
    if (len > 0) {
      probe += '1';
      i += len;
    } else {
      probe += shape[i++];
    }
  }
  eq::LinearSystem sys = eq::parse_system(probe);
  if (eq::shape_of(sys) != shape) fail(ErrorCode::kSyntax, "'" + shape + "' is not a canonical equation shape");
  return sys;
}

std::set<std::string> shape_slots(const std::string& shape) {
  const auto all = slots_in(shape);
  return {all.begin(), all.end()};
}

}  // namespace

void validate_template(const MwpTemplate& t) {
  probe_shape(t.shape);
  const auto allowed = shape_slots(t.shape);
  for (const auto& s : slots_in(t.text)) {
    if (!allowed.count(s) && s != kg::kXEntityToken && s != kg::kYEntityToken) {
      fail(ErrorCode::kParse, "template placeholder " + s + " has no slot in shape '" + t.shape + "'");
    }
  }
}

std::vector<MwpTemplate> read_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open template file " + path.string());
  std::vector<MwpTemplate> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      MwpTemplate t{j.at("template").get<std::string>(), j.at("shape").get<std::string>(), j.at("topic").get<std::string>()};
      validate_template(t);
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  require(!out.empty(), ErrorCode::kTemplateGap, path.string() + " holds no templates");
  return out;
}

std::vector<std::string> topic_entities(const kg::KnowledgeGraph& kg, const std::string& topic) {
  std::set<std::string> out;
  for (const auto& t : kg.triples()) {
    if (t.relation == "belong_to" && t.tail == topic) out.insert(t.head);
  }
  return {out.begin(), out.end()};
}

eq::LinearSystem sample_system(const std::string& shape, const SynthOptions& o, Rng& rng) {
  const eq::LinearSystem probe = probe_shape(shape);
  require(o.coef_min >= 1 && o.coef_max >= o.coef_min && o.solution_min >= 1 && o.solution_max >= o.solution_min,
          ErrorCode::kConfig, "invalid synthesis ranges");
  auto coef = [&] { return Rational(rng.uniform_int(o.coef_min, o.coef_max)); };
  for (int attempt = 0; attempt < 20000; ++attempt) {
    Rational value[2] = {Rational(rng.uniform_int(o.solution_min, o.solution_max)),
                         Rational(rng.uniform_int(o.solution_min, o.solution_max))};
    auto var = [&](eq::Variable v) -> Rational& { return value[v == eq::Variable::kX ? 0 : 1]; };
    eq::EquationAst asts[2] = {probe.first, probe.second};
    bool ok = true;
    // Variable-form equations pin one unknown to the other; settle them first.
    for (auto& e : asts) {
      if (!e.variable_rhs) continue;
      if (e.first.coefficient) e.first.coefficient = coef();
      if (e.second.coefficient) e.second.coefficient = coef();
      const Rational lhs = e.second.coefficient.value_or(1) * var(e.second.variable) / e.first.coefficient.value_or(1);
      if (boost::multiprecision::denominator(lhs) != 1 || lhs < o.solution_min) ok = false;
      var(e.first.variable) = lhs;
    }
    if (!ok) continue;
    for (auto& e : asts) {
      if (e.variable_rhs) continue;
      if (e.first.coefficient) e.first.coefficient = coef();
      if (e.second.coefficient) e.second.coefficient = coef();
      Rational t0 = e.first.coefficient.value_or(1) * var(e.first.variable);
      const Rational t1 = e.second.coefficient.value_or(1) * var(e.second.variable);
      if (e.lead == eq::Op::kMinus) t0 = -t0;
      Rational r;
      switch (e.between) {
        case eq::Op::kPlus: r = t0 + t1; break;
        case eq::Op::kMinus: r = t0 - t1; break;
        case eq::Op::kDivide: r = t0 / t1; break;
        default: fail(ErrorCode::kNonLinear, "shape '" + shape + "' is not linear");
      }
      if (r <= 0 || boost::multiprecision::denominator(r) != 1) {
        ok = false;
        break;
      }
      if (e.rhs_op == eq::Op::kNone) {
        e.rhs = r;
        continue;
      }
      Rational p = coef();
      switch (e.rhs_op) {
        case eq::Op::kPlus: e.rhs = r - p; break;
        case eq::Op::kMinus: e.rhs = r + p; break;
        case eq::Op::kTimes: e.rhs = r / p; break;
        case eq::Op::kDivide: e.rhs = r * p; break;
        default: break;
      }
      e.rhs_extra = p;
      if (e.rhs <= 0 || boost::multiprecision::denominator(e.rhs) != 1) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    eq::LinearSystem sys = eq::parse_system(eq::serialize(eq::LinearSystem{asts[0], asts[1], std::nullopt}));
    try {
      const auto sol = eq::solve_system(sys);
      if (sol.x != value[0] || sol.y != value[1]) continue;
    } catch (const Error&) {
      continue;
    }
    std::set<Rational> distinct;
    const auto slots = eq::slot_values(sys);
    for (const auto& sv : slots) distinct.insert(sv.value);
    if (distinct.size() != slots.size()) continue;
    if (eq::shape_of(sys) != shape) continue;
    return sys;
  }
  fail(ErrorCode::kContract, "could not sample a solvable system of shape '" + shape + "' within the configured ranges");
}

std::vector<RawSample> synth_corpus(std::span<const MwpTemplate> templates, const kg::KnowledgeGraph& kg, int count,
                                    std::uint64_t seed, const SynthOptions& options) {
  require(count >= 0, ErrorCode::kContract, "negative sample count");
  std::map<std::string, std::vector<const MwpTemplate*>> by_shape;
  for (const auto& t : templates) {
    validate_template(t);
    if (!options.topics.empty() &&
        std::find(options.topics.begin(), options.topics.end(), t.topic) == options.topics.end()) {
      continue;
    }
    if (!kg.is_topic(t.topic)) fail(ErrorCode::kTopicNotFound, "template topic '" + t.topic + "' is not in the knowledge graph");
    require(topic_entities(kg, t.topic).size() >= 2, ErrorCode::kContract,
            "topic '" + t.topic + "' needs at least two belong_to entities");
    by_shape[t.shape].push_back(&t);
  }
  std::vector<std::string> shapes = options.shapes;
  if (shapes.empty()) {
    for (const auto& [shape, _] : by_shape) shapes.push_back(shape);
  }
  for (const auto& s : shapes) {
    if (!by_shape.count(s)) fail(ErrorCode::kTemplateGap, "no template for equation shape '" + s + "'");
  }
  require(!shapes.empty(), ErrorCode::kTemplateGap, "no templates given");

  Rng rng(seed);
  std::vector<RawSample> out;
  while (static_cast<int>(out.size()) < count) {
    const std::string& shape = shapes[rng.below(shapes.size())];
    const auto& pool = by_shape[shape];
    const MwpTemplate& t = *pool[rng.below(pool.size())];
    const auto ents = topic_entities(kg, t.topic);
    const std::size_t xi = rng.below(ents.size());
    std::size_t yi = rng.below(ents.size() - 1);
    if (yi >= xi) ++yi;
    const kg::Binding binding{ents[xi], ents[yi]};
    const eq::LinearSystem sys = sample_system(shape, options, rng);
    const auto slots = generation_slots(sys, binding);
    const std::string equations = eq::serialize(sys);
    if (!options.all_variants) {
      out.push_back({equations, t.topic, binding.x, binding.y, relexicalize(t.text, slots)});
      continue;
    }
    for (const MwpTemplate* v : pool) {
      if (v->topic != t.topic || static_cast<int>(out.size()) == count) continue;
      out.push_back({equations, t.topic, binding.x, binding.y, relexicalize(v->text, slots)});
    }
  }
  return out;
}

std::string template_baseline(std::span<const MwpTemplate> templates, const eq::LinearSystem& system,
                              const std::string& topic, const kg::Binding& binding) {
  const std::string shape = eq::shape_of(system);
  for (const auto& t : templates) {
    if (t.shape == shape && t.topic == topic) return relexicalize(t.text, generation_slots(system, binding));
  }
  fail(ErrorCode::kTemplateGap, "no template for equation shape '" + shape + "' under topic '" + topic + "'");
}

Split split(std::span<const RawSample> data, double dev_fraction, double test_fraction, std::uint64_t seed) {
  require(dev_fraction >= 0 && test_fraction >= 0 && dev_fraction + test_fraction < 1.0, ErrorCode::kContract,
          "split fractions must be non-negative and sum below 1");
  const std::size_t n = data.size();
  const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  require(n_dev + n_test < n || n == 0, ErrorCode::kContract, "split leaves no training data");
  require(dev_fraction == 0 || n_dev > 0, ErrorCode::kContract, "dev split would be empty");
  require(test_fraction == 0 || n_test > 0, ErrorCode::kContract, "test split would be empty");
  require(n > 0, ErrorCode::kContract, "cannot split an empty dataset");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  std::vector<int> part(n, 0);
  for (std::size_t k = 0; k < n_dev; ++k) part[idx[k]] = 1;
  for (std::size_t k = n_dev; k < n_dev + n_test; ++k) part[idx[k]] = 2;
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    (part[i] == 0 ? s.train : part[i] == 1 ? s.dev : s.test).push_back(data[i]);
  }
  return s;
}

}  // namespace mwpgen::corpus
