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
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mwpgen/levi.hpp"

namespace mwpgen::kg {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  auto operator<=>(const Triple&) const = default;
};

inline constexpr const char* kTopicRelation = "is_topic";
inline constexpr const char* kBindRelation = "bound_to";
inline constexpr const char* kXEntityToken = "<x_entity>";
inline constexpr const char* kYEntityToken = "<y_entity>";

/// Immutable after load. Topic declarations ("<entity> is_topic true") are
/// kept apart from the ordinary triples.
class KnowledgeGraph {
 public:
  /// Adds a triple unless it is already present; returns false on a duplicate.
  bool add(const Triple& t);

  const std::vector<Triple>& triples() const { return triples_; }
  const std::set<std::string>& topics() const { return topics_; }
  const std::vector<std::string>& entities() const { return entities_; }
  bool has_entity(const std::string& name) const { return entity_index_.count(name) != 0; }
  bool is_topic(const std::string& name) const { return topics_.count(name) != 0; }
  std::size_t duplicates() const { return duplicates_; }

  /// Every relation label used by ordinary triples, sorted.
  std::vector<std::string> relations() const;

 private:
  void note_entity(const std::string& name);

  std::vector<Triple> triples_;
  std::set<Triple> seen_;
  std::set<std::string> topics_;
  std::vector<std::string> entities_;
  std::map<std::string, std::size_t> entity_index_;
  std::size_t duplicates_ = 0;
};

/// Parses "head<TAB>relation<TAB>tail" lines; '#' comments and blank lines
/// are skipped. Throws ParseError (with line number) or EmptyGraph.
KnowledgeGraph parse_triples(std::istream& in, const std::string& source = "<input>");
KnowledgeGraph load_triples(const std::filesystem::path& path);
/// Writes topic declarations followed by the triples.
std::string serialize_triples(const KnowledgeGraph& kg);

struct Binding {
  std::string x;
  std::string y;
};

struct CskgInstance {
  std::string topic;
  Binding binding;
  graph::LabeledGraph subgraph;
  graph::LeviGraph levi;
};

/// Depth-limited undirected BFS closure from {topic, x, y} (neighbors visited
/// in lexicographic order), plus shortest paths from x and y to the topic,
/// induced on the KG, with binding edges x -bound_to-> <x_entity> and
/// y -bound_to-> <y_entity> appended.
CskgInstance topic_instance(const KnowledgeGraph& kg, const std::string& topic, const Binding& binding,
                            int depth = 2);

}  // namespace mwpgen::kg
