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

#include "mwpgen/encoder.hpp"

#include "mwpgen/error.hpp"
#include "mwpgen/optim.hpp"

namespace mwpgen::encoder {

using nn::Matrix;
using nn::Var;

namespace {
const char* kSquare[] = {"W_z", "U_z", "W_r", "U_r", "W_h", "U_h"};
}

void register_ggnn(nn::ParameterStore& store, const std::string& prefix, int dim, double init_std, Rng& rng) {
  for (const char* name : kSquare) store.add(prefix + "." + name, nn::init_normal(dim, dim, init_std, rng));
  store.add(prefix + ".W_star", nn::init_normal(2 * dim, dim, init_std, rng));
}

GgnnWeights bind_ggnn(nn::Tape& tape, nn::ParameterStore& store, const std::string& prefix) {
  auto p = [&](const char* name) { return tape.param(store.at(prefix + "." + name)); };
  return {p("W_z"), p("U_z"), p("W_r"), p("U_r"), p("W_h"), p("U_h"), p("W_star")};
}

std::vector<int> node_ids(const graph::LeviGraph& levi, const text::Vocab& vocab) {
  std::vector<int> ids;
  ids.reserve(levi.nodes.size());
  for (const auto& token : levi.nodes) {
    auto id = vocab.find(token);
    if (!id) fail(ErrorCode::kVocab, "graph node '" + token + "' has no embedding");
    ids.push_back(*id);
  }
  return ids;
}

GraphBatch make_batch(const std::vector<Matrix>& adjacency, const std::vector<std::vector<int>>& ids) {
  require(adjacency.size() == ids.size() && !ids.empty(), ErrorCode::kContract, "empty or ragged graph batch");
  GraphBatch b;
  b.num_graphs = static_cast<int>(ids.size());
  std::vector<Eigen::Triplet<double>> entries;
  int offset = 0;
  for (std::size_t g = 0; g < ids.size(); ++g) {
    const Matrix& a = adjacency[g];
    require(a.rows() == static_cast<Eigen::Index>(ids[g].size()) && a.cols() == a.rows(), ErrorCode::kDimension,
            "adjacency " + nn::shape_string(a) + " does not match " + std::to_string(ids[g].size()) + " nodes");
    b.offsets.push_back(offset);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        if (a(r, c) != 0.0) entries.emplace_back(offset + static_cast<int>(r), offset + static_cast<int>(c), a(r, c));
      }
    }
    b.node_ids.insert(b.node_ids.end(), ids[g].begin(), ids[g].end());
    b.segment.insert(b.segment.end(), ids[g].size(), static_cast<int>(g));
    offset += static_cast<int>(ids[g].size());
  }
  b.offsets.push_back(offset);
  auto sparse = std::make_shared<nn::SparseMatrix>(offset, offset);
  sparse->setFromTriplets(entries.begin(), entries.end());
  b.adjacency = std::move(sparse);
  return b;
}

GraphBatch make_batch(const std::vector<const graph::LeviGraph*>& graphs, const text::Vocab& vocab) {
  std::vector<Matrix> adj;
  std::vector<std::vector<int>> ids;
  for (const auto* g : graphs) {
    adj.push_back(graph::row_normalize(*g));
    ids.push_back(node_ids(*g, vocab));
  }
  return make_batch(adj, ids);
}

GraphEncoding ggnn_encode(nn::Tape& tape, Var embedding, const GgnnWeights& w, const GraphBatch& batch, int hops) {
  require(hops >= 0, ErrorCode::kContract, "hop count must be non-negative");
  GraphEncoding enc;
  enc.g0 = nn::embed_lookup(embedding, batch.node_ids);
  Var g = enc.g0;
  for (int t = 0; t < hops; ++t) {
    Var gamma = nn::sparse_matmul(batch.adjacency, g);
    Var z = nn::sigmoid(nn::add(nn::matmul(gamma, w.w_z), nn::matmul(g, w.u_z)));
    Var r = nn::sigmoid(nn::add(nn::matmul(gamma, w.w_r), nn::matmul(g, w.u_r)));
    Var cand = nn::tanh(nn::add(nn::matmul(gamma, w.w_h), nn::matmul(nn::mul(r, g), w.u_h)));
    g = nn::add(nn::mul(nn::affine(z, -1.0, 1.0), g), nn::mul(z, cand));
  }
  enc.gn = g;
  enc.gstar = nn::matmul(nn::concat({enc.g0, enc.gn}), w.w_star);
  Matrix inv(static_cast<Eigen::Index>(batch.segment.size()), 1);
  for (int gi = 0; gi < batch.num_graphs; ++gi) {
    const int n = batch.offsets[gi + 1] - batch.offsets[gi];
    require(n > 0, ErrorCode::kEmptyGraph, "graph without nodes in batch");
    inv.middleRows(batch.offsets[gi], n).setConstant(1.0 / n);
  }
  enc.pooled = nn::segment_weighted_sum(tape.constant(std::move(inv)), enc.gstar, batch.segment, batch.num_graphs);
  return enc;
}

}  // namespace mwpgen::encoder
