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

#include <string>
#include <utility>
#include <vector>

#include "mwpgen/equation.hpp"
#include "mwpgen/tensor.hpp"

namespace mwpgen::graph {

using eq::LabeledEdge;
using eq::LabeledGraph;

enum class EdgeKind { kForward, kReverse, kSelfLoop };

struct Edge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::kForward;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Unlabeled directed graph whose nodes are tokens. Layout:
///   [0, V)              source nodes, in input order
///   V + 2k, V + 2k + 1  forward / reverse ("<relation>_r") node of source edge k
/// Edges: for each source edge k = (vi, r, vj) in order
///   vi -> r, r -> vj, vj -> r_r, r_r -> vi
/// followed by one self-loop per node in node order.
struct LeviGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  int source_nodes = 0;
  std::vector<int> forward_node;  // per source edge
  std::vector<int> reverse_node;  // per source edge

  int size() const { return static_cast<int>(nodes.size()); }
};

/// The plain transformation: one node per labeled edge, two unlabeled edges
/// per labeled edge, no reverse nodes and no self-loops.
struct BaseLevi {
  std::vector<std::string> nodes;
  std::vector<std::pair<int, int>> edges;
};

BaseLevi base_levi_transform(const LabeledGraph& g);

/// Throws EmptyGraph when g has no nodes.
LeviGraph levi_transform(const LabeledGraph& g);

/// Recovers the source graph from a Levi graph built by levi_transform.
LabeledGraph recover_source(const LeviGraph& levi);

/// a(v, u) = 1 / indegree(v) for each distinct in-neighbor u of v.
nn::Matrix row_normalize(const LeviGraph& levi);

/// Graphviz text; reverse edges dashed, self-loops dotted.
std::string to_graphviz(const LeviGraph& levi, const std::string& name = "levi");

inline constexpr const char* kReverseSuffix = "_r";

}  // namespace mwpgen::graph
