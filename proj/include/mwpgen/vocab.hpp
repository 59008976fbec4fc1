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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwpgen::text {

inline constexpr const char* kPad = "<pad>";
inline constexpr const char* kBos = "<bos>";
inline constexpr const char* kEos = "<eos>";
inline constexpr const char* kUnk = "<unk>";
/// Word-boundary marker that stands in for a space inside subword units.
inline constexpr const char* kSpaceMark = "\xE2\x96\x81";  // U+2581

/// <pad> <bos> <eos> <unk>, the quantity slots, the entity slots, <dum>.
const std::vector<std::string>& special_tokens();
bool is_special_token(std::string_view s);
/// Quantity and entity slot tokens, in delexicalization priority order.
const std::vector<std::string>& slot_tokens();

/// A pre-tokenized piece of text: either an atomic special token or a run
/// of code points (spaces already replaced by the boundary mark).
struct Unit {
  std::string text;
  bool special = false;
};

/// Splits text at boundary marks, punctuation and special tokens.
std::vector<Unit> pre_tokenize(std::string_view text);
/// UTF-8 code points of s.
std::vector<std::string> code_points(std::string_view s);

using Merge = std::pair<std::string, std::string>;

/// Greedy BPE: repeatedly merges the most frequent adjacent pair (ties go
/// to the lexicographically smallest pair) until num_merges merges are
/// made or no pair occurs at least twice. Special tokens never take part.
std::vector<Merge> train_bpe(std::span<const std::string> corpus, int num_merges);

class Vocab {
 public:
  /// Vocabulary holding only the special tokens.
  Vocab();

  int add(const std::string& token);
  std::optional<int> find(const std::string& token) const;
  /// Throws VocabError naming the token.
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  int pad() const { return 0; }
  int bos() const { return 1; }
  int eos() const { return 2; }
  int unk() const { return 3; }

  void set_merges(std::vector<Merge> merges);
  const std::vector<Merge>& merges() const { return merges_; }

  /// Subword ids; characters outside the vocabulary become <unk> and are
  /// reported through `unknown` when given.
  std::vector<int> encode(std::string_view text, std::vector<std::string>* unknown = nullptr) const;
  /// Concatenates token strings and restores spaces; <pad>/<bos>/<eos> are dropped.
  std::string decode(std::span<const int> ids) const;

  /// Subword pieces of one non-special unit after applying the merges.
  std::vector<std::string> segment(const std::string& unit) const;

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
  std::vector<Merge> merges_;
  std::map<Merge, int> merge_rank_;
};

/// Specials, then the sorted alphabet of the corpus, then merge products in
/// merge order, then `extra` tokens (graph node tokens) not yet present.
Vocab build_vocab(std::span<const std::string> corpus, int num_merges, std::span<const std::string> extra);

}  // namespace mwpgen::text
