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

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mwpgen/cskg.hpp"
#include "mwpgen/equation.hpp"
#include "mwpgen/error.hpp"
#include "mwpgen/levi.hpp"
#include "mwpgen/rng.hpp"
#include "support/oracles.hpp"

using namespace mwpgen;
using graph::EdgeKind;
using graph::LabeledGraph;
using testing::in_neighbors;
using testing::random_graph;

TEST_CASE("levi: two nodes and one edge") {
  LabeledGraph g{{"a", "b"}, {{0, "rel", 1}}};
  auto levi = graph::levi_transform(g);
  CHECK(levi.nodes == std::vector<std::string>{"a", "b", "rel", "rel_r"});
  CHECK(levi.edges.size() == 8);
  std::vector<graph::Edge> expected{{0, 2, EdgeKind::kForward}, {2, 1, EdgeKind::kForward},
                                    {1, 3, EdgeKind::kReverse}, {3, 0, EdgeKind::kReverse}};
  for (int i = 0; i < 4; ++i) CHECK(levi.edges[i] == expected[i]);
  for (int i = 0; i < 4; ++i) CHECK(levi.edges[4 + i] == graph::Edge{i, i, EdgeKind::kSelfLoop});
}

TEST_CASE("levi: symbolic graph of ax+by=m") {
  auto sys = eq::parse_system("2x+4y=86; x+y=27");
  auto sym = eq::build_symbolic_graph(sys);
  // First equation alone: nodes <a>, <b>, x, y, <m> and four edges.
  LabeledGraph first;
  std::map<int, int> remap;
  auto keep = [&](int i) {
    if (!remap.count(i)) {
      remap[i] = static_cast<int>(first.nodes.size());
      first.nodes.push_back(sym.graph.nodes[i]);
    }
    return remap[i];
  };
  for (const auto& e : sym.graph.edges) {
    const auto& h = sym.graph.nodes[e.head];
    const auto& t = sym.graph.nodes[e.tail];
    auto first_eq = [](const std::string& s) { return s == "<a>" || s == "<b>" || s == "<m>" || s == "x" || s == "y"; };
    if (first_eq(h) && first_eq(t)) first.edges.push_back({keep(e.head), e.relation, keep(e.tail)});
  }
  REQUIRE(first.nodes.size() == 5);
  REQUIRE(first.edges.size() == 4);
  auto levi = graph::levi_transform(first);
  CHECK(levi.size() == 13);
  CHECK(levi.edges.size() == 29);
}

TEST_CASE("levi: empty graph rejected") {
  try {
    graph::levi_transform(LabeledGraph{});
    FAIL("expected EmptyGraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyGraph);
  }
}

TEST_CASE("levi: count formulas, inversion and normalization on random graphs") {
  Rng rng(20260611);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng);
    const std::size_t v = g.nodes.size(), e = g.edges.size();
    auto levi = graph::levi_transform(g);
    CHECK(levi.nodes.size() == v + 2 * e);
    CHECK(levi.edges.size() == 4 * e + levi.nodes.size());

    auto base = graph::base_levi_transform(g);
    CHECK(base.nodes.size() == v + e);
    CHECK(base.edges.size() == 2 * e);

    CHECK(graph::recover_source(levi) == g);
    auto again = graph::levi_transform(g);
    CHECK(again.nodes == levi.nodes);
    CHECK(again.edges == levi.edges);

    for (std::size_t k = 0; k < e; ++k) {
      CHECK(levi.nodes[levi.forward_node[k]] == g.edges[k].relation);
      CHECK(levi.nodes[levi.reverse_node[k]] == g.edges[k].relation + "_r");
    }

    auto a = graph::row_normalize(levi);
    auto in = in_neighbors(levi);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      CHECK(std::abs(a.row(r).sum() - 1.0) <= 1e-12);
      CHECK(in[r].count(static_cast<int>(r)) == 1);
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double want = in[r].count(static_cast<int>(c)) ? 1.0 / in[r].size() : 0.0;
        CHECK(a(r, c) == want);
      }
    }
  }
}

TEST_CASE("row_normalize: isolated node and three in-neighbors") {
  LabeledGraph g{{"a", "b", "c"}, {{0, "r", 1}}};
  auto levi = graph::levi_transform(g);
  auto a = graph::row_normalize(levi);
  // "c" only sees itself.
  CHECK(a(2, 2) == 1.0);
  CHECK(a.row(2).sum() == 1.0);
  // "a" receives from itself and from "r_r".
  CHECK(a(0, 0) == doctest::Approx(0.5));
  CHECK(a(0, 4) == doctest::Approx(0.5));

  LabeledGraph h{{"a", "b", "c"}, {{0, "r", 2}, {1, "s", 2}}};
  auto lh = graph::levi_transform(h);
  auto ah = graph::row_normalize(lh);
  CHECK(ah(2, 2) == 1.0 / 3);
  CHECK(ah(2, 3) == 1.0 / 3);
  CHECK(ah(2, 5) == 1.0 / 3);
}

TEST_CASE("graphviz export marks reverse and self-loop edges") {
  LabeledGraph g{{"a", "b"}, {{0, "rel", 1}}};
  auto dot = graph::to_graphviz(graph::levi_transform(g), "t");
  CHECK(dot.find("digraph \"t\"") != std::string::npos);
  CHECK(dot.find("dashed") != std::string::npos);
  CHECK(dot.find("dotted") != std::string::npos);
  CHECK(dot.find("rel_r") != std::string::npos);
}

// ---------------------------------------------------------------------------

namespace {

const char* kLivestock =
    "# starter\n"
    "livestock\tis_topic\ttrue\n"
    "vehicle\tis_topic\ttrue\n"
    "chicken\tbelong_to\tlivestock\n"
    "rabbit\tbelong_to\tlivestock\n"
    "chicken\thas_head_entity\thead\n"
    "rabbit\thas_head_entity\thead\n"
    "chicken\thas_feet_number\t2 legs\n"
    "rabbit\thas_feet_number\t4 legs\n"
    "\n"
    "chicken\tbelong_to\tlivestock\n"
    "car\tbelong_to\tvehicle\n"
    "car\thas_wheel_number\t4 wheels\n"
    "wheel count\tmeasures\t4 wheels\n"
    "moon\torbits\tearth\n";

kg::KnowledgeGraph livestock_kg() {
  std::istringstream in(kLivestock);
  return kg::parse_triples(in, "mem");
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kContract;
}

}  // namespace

TEST_CASE("cskg: parsing") {
  auto g = livestock_kg();
  CHECK(g.topics() == std::set<std::string>{"livestock", "vehicle"});
  CHECK(g.duplicates() == 1);
  CHECK(g.triples().front() == kg::Triple{"chicken", "belong_to", "livestock"});
  CHECK(g.triples().size() == 10);
  CHECK(g.has_entity("livestock"));
  CHECK(g.has_entity("2 legs"));

  std::istringstream bad("# c\nchicken\tbelong_to\tlivestock\nchicken\tbelong_to\n");
  try {
    kg::parse_triples(bad, "bad.tsv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("bad.tsv:3") != std::string::npos);
  }
  std::istringstream empty("# nothing\n\n");
  CHECK(code_of([&] { kg::parse_triples(empty); }) == ErrorCode::kEmptyGraph);
}

TEST_CASE("cskg: serialize and reload") {
  auto g = livestock_kg();
  std::istringstream in(kg::serialize_triples(g));
  auto h = kg::parse_triples(in);
  CHECK(std::set<kg::Triple>(g.triples().begin(), g.triples().end()) ==
        std::set<kg::Triple>(h.triples().begin(), h.triples().end()));
  CHECK(g.topics() == h.topics());
}

TEST_CASE("cskg: livestock instance") {
  auto g = livestock_kg();
  auto inst = kg::topic_instance(g, "livestock", {"chicken", "rabbit"});
  const auto& nodes = inst.subgraph.nodes;
  auto has = [&](const std::string& n) { return std::find(nodes.begin(), nodes.end(), n) != nodes.end(); };
  for (const char* n : {"livestock", "chicken", "rabbit", "head", "2 legs", "4 legs", "<x_entity>", "<y_entity>"})
    CHECK(has(n));
  CHECK_FALSE(has("car"));
  CHECK_FALSE(has("moon"));
  // Six KG triples plus the two binding edges.
  CHECK(inst.subgraph.edges.size() == 8);
  int bindings = 0;
  for (const auto& e : inst.subgraph.edges) {
    if (e.relation != kg::kBindRelation) continue;
    ++bindings;
    const auto& h = nodes[e.head];
    const auto& t = nodes[e.tail];
    CHECK(((h == "chicken" && t == "<x_entity>") || (h == "rabbit" && t == "<y_entity>")));
  }
  CHECK(bindings == 2);
  CHECK(inst.levi.nodes.size() == nodes.size() + 2 * inst.subgraph.edges.size());
  CHECK(inst.levi.edges.size() == 4 * inst.subgraph.edges.size() + inst.levi.nodes.size());

  auto again = kg::topic_instance(g, "livestock", {"chicken", "rabbit"});
  CHECK(again.subgraph == inst.subgraph);
}

TEST_CASE("cskg: instance errors") {
  auto g = livestock_kg();
  CHECK(code_of([&] { kg::topic_instance(g, "galaxy", {"chicken", "rabbit"}); }) == ErrorCode::kTopicNotFound);
  CHECK(code_of([&] { kg::topic_instance(g, "livestock", {"chicken", "unicorn"}); }) == ErrorCode::kEntityNotFound);
  CHECK(code_of([&] { kg::topic_instance(g, "livestock", {"chicken", "chicken"}); }) == ErrorCode::kContract);
  CHECK(code_of([&] { kg::topic_instance(g, "livestock", {"chicken", "moon"}); }) ==
        ErrorCode::kDisconnectedBinding);
}

TEST_CASE("cskg: shipped starter graph") {
  auto g = kg::load_triples(MWPGEN_DATA_DIR "/cskg.tsv");
  for (const char* t : {"livestock", "vehicle", "rowing boat", "buy ticket", "dormitory", "insects"})
    CHECK(g.is_topic(t));
  auto inst = kg::topic_instance(g, "vehicle", {"motorcycle", "car"});
  CHECK(inst.levi.size() > 0);
  CHECK(code_of([] { kg::load_triples("/nonexistent/kg.tsv"); }) == ErrorCode::kIo);
}
