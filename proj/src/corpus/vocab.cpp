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

#include "mwpgen/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mwpgen/error.hpp"

namespace mwpgen::text {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> kAll = {
      kPad, kBos, kEos, kUnk, "<a>", "<b>", "<c>", "<d>", "<m>", "<n>", "<p>", "<q>", "<x_entity>", "<y_entity>", "<dum>"};
  return kAll;
}

bool is_special_token(std::string_view s) {
  const auto& all = special_tokens();
  return std::find(all.begin(), all.end(), s) != all.end();
}

const std::vector<std::string>& slot_tokens() {
  static const std::vector<std::string> kSlots = {"<a>", "<b>", "<m>", "<p>", "<c>", "<d>", "<n>", "<q>", "<x_entity>", "<y_entity>"};
  return kSlots;
}

std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    len = std::min(len, s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

namespace {

enum class CharClass { kMark, kWord, kPunct };

CharClass classify(const std::string& cp) {
  if (cp == kSpaceMark || cp == " ") return CharClass::kMark;
  if (cp.size() > 1) return CharClass::kWord;
  const auto c = static_cast<unsigned char>(cp[0]);
  return std::isalnum(c) != 0 ? CharClass::kWord : CharClass::kPunct;
}

}  // namespace

std::vector<Unit> pre_tokenize(std::string_view text) {
  std::vector<Unit> units;
  Unit cur;
  auto flush = [&] {
    if (!cur.text.empty()) units.push_back(cur);
    cur = Unit{};
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      const auto close = text.find('>', i);
      if (close != std::string_view::npos && is_special_token(text.substr(i, close - i + 1))) {
        flush();
        units.push_back({std::string(text.substr(i, close - i + 1)), true});
        i = close + 1;
        continue;
      }
    }
    const auto cps = code_points(text.substr(i, 4));
    const std::string cp = cps.front();
    i += cp.size();
    switch (classify(cp)) {
      case CharClass::kMark:
        flush();
        cur.text = kSpaceMark;
        break;
      case CharClass::kPunct:
        flush();
        units.push_back({cp, false});
        break;
      case CharClass::kWord:
        cur.text += cp;
        break;
    }
  }
  flush();
  return units;
}

std::vector<Merge> train_bpe(std::span<const std::string> corpus, int num_merges) {
  // Unique units with their frequencies, each as a symbol sequence.
  std::map<std::string, long> freq;
  for (const auto& line : corpus) {
    for (const auto& u : pre_tokenize(line)) {
      if (!u.special) ++freq[u.text];
    }
  }
  std::vector<std::pair<std::vector<std::string>, long>> words;
  for (const auto& [w, f] : freq) words.emplace_back(code_points(w), f);

  std::vector<Merge> merges;
  for (int step = 0; step < num_merges; ++step) {
    std::map<Merge, long> counts;
    for (const auto& [syms, f] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += f;
    }
    const Merge* best = nullptr;
    long best_count = 1;
    for (const auto& [pair, c] : counts) {
      if (c > best_count) {  // map order makes the first maximum the smallest pair
        best = &pair;
        best_count = c;
      }
    }
    if (best == nullptr) break;
    const Merge m = *best;
    merges.push_back(m);
    const std::string joined = m.first + m.second;
    for (auto& [syms, f] : words) {
      std::vector<std::string> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == m.first && syms[i + 1] == m.second) {
          next.push_back(joined);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
    }
  }
  return merges;
}

Vocab::Vocab() {
  for (const auto& s : special_tokens()) add(s);
}

int Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<int> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) fail(ErrorCode::kVocab, "token '" + token + "' is not in the vocabulary");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  require(id >= 0 && id < size(), ErrorCode::kVocab, "token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::set_merges(std::vector<Merge> merges) {
  merges_ = std::move(merges);
  merge_rank_.clear();
  for (std::size_t i = 0; i < merges_.size(); ++i) merge_rank_.emplace(merges_[i], static_cast<int>(i));
}

std::vector<std::string> Vocab::segment(const std::string& unit) const {
  std::vector<std::string> syms = code_points(unit);
  while (syms.size() > 1) {
    int best_rank = -1;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = merge_rank_.find({syms[i], syms[i + 1]});
      if (it != merge_rank_.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_at = i;
      }
    }
    if (best_rank < 0) break;
    const Merge& m = merges_[static_cast<std::size_t>(best_rank)];
    std::vector<std::string> next;
    for (std::size_t i = 0; i < syms.size(); ++i) {
      if (i >= best_at && i + 1 < syms.size() && syms[i] == m.first && syms[i + 1] == m.second) {
        next.push_back(m.first + m.second);
        ++i;
      } else {
        next.push_back(syms[i]);
      }
    }
    syms = std::move(next);
  }
  return syms;
}

std::vector<int> Vocab::encode(std::string_view text, std::vector<std::string>* unknown) const {
  std::vector<int> ids;
  for (const auto& u : pre_tokenize(text)) {
    if (u.special) {
      ids.push_back(id(u.text));
      continue;
    }
    for (const auto& piece : segment(u.text)) {
      if (auto found = find(piece)) {
        ids.push_back(*found);
      } else {
        // A piece missing from the vocabulary falls back to its characters.
        for (const auto& cp : code_points(piece)) {
          if (auto c = find(cp)) {
            ids.push_back(*c);
          } else {
            ids.push_back(unk());
            if (unknown) unknown->push_back(cp);
          }
        }
      }
    }
  }
  return ids;
}

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id == pad() || id == bos() || id == eos()) continue;
    out += token(id);
  }
  std::string result;
  const std::string mark = kSpaceMark;
  for (std::size_t i = 0; i < out.size();) {
    if (out.compare(i, mark.size(), mark) == 0) {
      result += ' ';
      i += mark.size();
    } else {
      result += out[i++];
    }
  }
  return result;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write vocabulary " + path.string());
  out << "# mwpgen vocabulary v1\n[specials]\n";
  for (const auto& s : special_tokens()) out << s << '\n';
  out << "[tokens]\n";
  for (std::size_t i = special_tokens().size(); i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  out << "[merges]\n";
  for (const auto& [a, b] : merges_) out << a << ' ' << b << '\n';
  require(out.good(), ErrorCode::kIo, "failed writing vocabulary " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open vocabulary " + path.string());
  Vocab v;
  std::vector<Merge> merges;
  std::string line;
  std::string section;
  std::size_t special_index = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0 && section.empty()) continue;
    if (line == "[specials]" || line == "[tokens]" || line == "[merges]") {
      section = line;
      continue;
    }
    if (section == "[specials]") {
      require(special_index < special_tokens().size() && line == special_tokens()[special_index], ErrorCode::kVocab,
              path.string() + ": special token block does not match this build");
      ++special_index;
    } else if (section == "[tokens]") {
      require(!v.contains(line), ErrorCode::kVocab, path.string() + ": duplicate token '" + line + "'");
      v.add(line);
    } else if (section == "[merges]") {
      const auto sp = line.find(' ');
      require(sp != std::string::npos, ErrorCode::kVocab, path.string() + ": malformed merge '" + line + "'");
      merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
  }
  require(special_index == special_tokens().size(), ErrorCode::kVocab, path.string() + ": missing special tokens");
  v.set_merges(std::move(merges));
  return v;
}

Vocab build_vocab(std::span<const std::string> corpus, int num_merges, std::span<const std::string> extra) {
  Vocab v;
  std::set<std::string> alphabet;
  for (const auto& line : corpus) {
    for (const auto& u : pre_tokenize(line)) {
      if (u.special) continue;
      for (const auto& cp : code_points(u.text)) alphabet.insert(cp);
    }
  }
  for (const auto& c : alphabet) v.add(c);
  auto merges = train_bpe(corpus, num_merges);
  for (const auto& [a, b] : merges) v.add(a + b);
  v.set_merges(std::move(merges));
  for (const auto& t : extra) v.add(t);
  return v;
}

}  // namespace mwpgen::text
