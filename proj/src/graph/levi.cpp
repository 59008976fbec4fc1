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

#include "mwpgen/levi.hpp"

#include <set>
#include <sstream>

#include "mwpgen/error.hpp"

namespace mwpgen::graph {

namespace {

void check_edges(const LabeledGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  for (const auto& e : g.edges) {
    if (e.head < 0 || e.head >= n || e.tail < 0 || e.tail >= n) {
      fail(ErrorCode::kContract, "edge '" + e.relation + "' refers to a node outside the graph");
    }
  }
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

BaseLevi base_levi_transform(const LabeledGraph& g) {
  check_edges(g);
  BaseLevi out;
  out.nodes = g.nodes;
  for (const auto& e : g.edges) {
    const int r = static_cast<int>(out.nodes.size());
    out.nodes.push_back(e.relation);
    out.edges.emplace_back(e.head, r);
    out.edges.emplace_back(r, e.tail);
  }
  return out;
}

LeviGraph levi_transform(const LabeledGraph& g) {
  require(!g.nodes.empty(), ErrorCode::kEmptyGraph, "cannot transform a graph without nodes");
  check_edges(g);
  LeviGraph out;
  out.nodes = g.nodes;
  out.source_nodes = static_cast<int>(g.nodes.size());
  for (const auto& e : g.edges) {
    const int f = static_cast<int>(out.nodes.size());
    out.nodes.push_back(e.relation);
    out.nodes.push_back(e.relation + kReverseSuffix);
    out.forward_node.push_back(f);
    out.reverse_node.push_back(f + 1);
    out.edges.push_back({e.head, f, EdgeKind::kForward});
    out.edges.push_back({f, e.tail, EdgeKind::kForward});
    out.edges.push_back({e.tail, f + 1, EdgeKind::kReverse});
    out.edges.push_back({f + 1, e.head, EdgeKind::kReverse});
  }
  for (int v = 0; v < out.size(); ++v) out.edges.push_back({v, v, EdgeKind::kSelfLoop});
  return out;
}

LabeledGraph recover_source(const LeviGraph& levi) {
  LabeledGraph g;
  g.nodes.assign(levi.nodes.begin(), levi.nodes.begin() + levi.source_nodes);
  std::vector<int> head(levi.nodes.size(), -1);
  std::vector<int> tail(levi.nodes.size(), -1);
  for (const auto& e : levi.edges) {
    if (e.kind != EdgeKind::kForward) continue;
    if (e.to >= levi.source_nodes) head[static_cast<std::size_t>(e.to)] = e.from;
    else tail[static_cast<std::size_t>(e.from)] = e.to;
  }
  for (int f : levi.forward_node) {
    const auto i = static_cast<std::size_t>(f);
    require(head[i] >= 0 && tail[i] >= 0, ErrorCode::kContract, "relation node without both endpoints");
    g.edges.push_back({head[i], levi.nodes[i], tail[i]});
  }
  return g;
}

nn::Matrix row_normalize(const LeviGraph& levi) {
  const int n = levi.size();
  std::vector<std::set<int>> in(static_cast<std::size_t>(n));
  for (const auto& e : levi.edges) in[static_cast<std::size_t>(e.to)].insert(e.from);
  nn::Matrix a = nn::Matrix::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    const auto& preds = in[static_cast<std::size_t>(v)];
    require(!preds.empty(), ErrorCode::kContract, "node '" + levi.nodes[static_cast<std::size_t>(v)] + "' has no in-edge");
    const double w = 1.0 / static_cast<double>(preds.size());
    for (int u : preds) a(v, u) = w;
  }
  return a;
}

std::string to_graphviz(const LeviGraph& levi, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << quoted(name) << " {\n";
  for (int v = 0; v < levi.size(); ++v) {
    os << "  n" << v << " [label=" << quoted(levi.nodes[static_cast<std::size_t>(v)]);
    if (v >= levi.source_nodes) os << ", shape=box";
    os << "];\n";
  }
  for (const auto& e : levi.edges) {
    os << "  n" << e.from << " -> n" << e.to;
    if (e.kind == EdgeKind::kReverse) os << " [style=dashed]";
    if (e.kind == EdgeKind::kSelfLoop) os << " [style=dotted]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace mwpgen::graph
