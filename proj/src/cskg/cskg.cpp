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

#include "mwpgen/cskg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "mwpgen/error.hpp"

namespace mwpgen::kg {

void KnowledgeGraph::note_entity(const std::string& name) {
  if (entity_index_.emplace(name, entities_.size()).second) entities_.push_back(name);
}

bool KnowledgeGraph::add(const Triple& t) {
  if (t.relation == kTopicRelation) {
    note_entity(t.head);
    if (!topics_.insert(t.head).second) {
      ++duplicates_;
      return false;
    }
    return true;
  }
  if (!seen_.insert(t).second) {
    ++duplicates_;
    return false;
  }
  note_entity(t.head);
  note_entity(t.tail);
  triples_.push_back(t);
  return true;
}

std::vector<std::string> KnowledgeGraph::relations() const {
  std::set<std::string> out;
  for (const auto& t : triples_) out.insert(t.relation);
  return {out.begin(), out.end()};
}

KnowledgeGraph parse_triples(std::istream& in, const std::string& source) {
  KnowledgeGraph kg;
  std::string line;
  int line_no = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      fail(ErrorCode::kParse, source + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields, found " +
                                  std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) fail(ErrorCode::kParse, source + ":" + std::to_string(line_no) + ": empty field");
    }
    kg.add({fields[0], fields[1], fields[2]});
    any = true;
  }
  require(any, ErrorCode::kEmptyGraph, source + " contains no triples");
  return kg;
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open triple file " + path.string());
  return parse_triples(in, path.string());
}

std::string serialize_triples(const KnowledgeGraph& kg) {
  std::ostringstream os;
  for (const auto& topic : kg.topics()) os << topic << '\t' << kTopicRelation << "\ttrue\n";
  for (const auto& t : kg.triples()) os << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  return os.str();
}

namespace {

using Adjacency = std::map<std::string, std::set<std::string>>;

Adjacency undirected(const KnowledgeGraph& kg) {
  Adjacency adj;
  for (const auto& t : kg.triples()) {
    adj[t.head].insert(t.tail);
    adj[t.tail].insert(t.head);
  }
  return adj;
}

/// Shortest path from `from` to `to` (inclusive); empty when unreachable.
/// Sorted neighbor sets make the BFS tree, and so the path, deterministic.
std::vector<std::string> shortest_path(const Adjacency& adj, const std::string& from, const std::string& to) {
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (cur == to) break;
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& next : it->second) {
      if (parent.emplace(next, cur).second) queue.push_back(next);
    }
  }
  if (!parent.count(to)) return {};
  std::vector<std::string> path{to};
  while (path.back() != from) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

CskgInstance topic_instance(const KnowledgeGraph& kg, const std::string& topic, const Binding& binding, int depth) {
  if (!kg.is_topic(topic)) fail(ErrorCode::kTopicNotFound, "unknown topic '" + topic + "'");
  for (const std::string* e : {&binding.x, &binding.y}) {
    if (!kg.has_entity(*e)) fail(ErrorCode::kEntityNotFound, "entity '" + *e + "' is not in the knowledge graph");
  }
  require(binding.x != binding.y, ErrorCode::kContract, "x and y must be bound to different entities");

  const Adjacency adj = undirected(kg);
  // Node order: BFS discovery order from the seeds.
  std::vector<std::string> order;
  std::map<std::string, int> dist;
  std::deque<std::string> queue;
  for (const std::string* s : {&topic, &binding.x, &binding.y}) {
    if (dist.emplace(*s, 0).second) {
      order.push_back(*s);
      queue.push_back(*s);
    }
  }
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (dist[cur] >= depth) continue;
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& next : it->second) {
      if (dist.emplace(next, dist[cur] + 1).second) {
        order.push_back(next);
        queue.push_back(next);
      }
    }
  }
  for (const std::string* e : {&binding.x, &binding.y}) {
    const auto path = shortest_path(adj, *e, topic);
    if (path.empty()) {
      fail(ErrorCode::kDisconnectedBinding, "entity '" + *e + "' is not connected to topic '" + topic + "'");
    }
    for (const auto& node : path) {
      if (dist.emplace(node, depth + 1).second) order.push_back(node);
    }
  }

  CskgInstance inst;
  inst.topic = topic;
  inst.binding = binding;
  std::map<std::string, int> index;
  for (const auto& node : order) {
    index[node] = static_cast<int>(inst.subgraph.nodes.size());
    inst.subgraph.nodes.push_back(node);
  }
  for (const auto& t : kg.triples()) {
    auto h = index.find(t.head);
    auto tl = index.find(t.tail);
    if (h != index.end() && tl != index.end()) inst.subgraph.edges.push_back({h->second, t.relation, tl->second});
  }
  const int xs = static_cast<int>(inst.subgraph.nodes.size());
  inst.subgraph.nodes.push_back(kXEntityToken);
  inst.subgraph.nodes.push_back(kYEntityToken);
  inst.subgraph.edges.push_back({index[binding.x], kBindRelation, xs});
  inst.subgraph.edges.push_back({index[binding.y], kBindRelation, xs + 1});
  inst.levi = graph::levi_transform(inst.subgraph);
  return inst;
}

}  // namespace mwpgen::kg
