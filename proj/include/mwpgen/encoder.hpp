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

#include <memory>
#include <string>
#include <vector>

#include "mwpgen/levi.hpp"
#include "mwpgen/rng.hpp"
#include "mwpgen/tensor.hpp"
#include "mwpgen/vocab.hpp"

namespace mwpgen::encoder {

/// Parameter names of one GGNN under `prefix`:
///   <prefix>.W_z  <prefix>.U_z  <prefix>.W_r  <prefix>.U_r  <prefix>.W_h  <prefix>.U_h   (dim x dim)
///   <prefix>.W_star                                                         (2 dim x dim)
/// Row convention: node states are rows, so gamma W_z plays the role of W^z gamma.
void register_ggnn(nn::ParameterStore& store, const std::string& prefix, int dim, double init_std, Rng& rng);

struct GgnnWeights {
  nn::Var w_z, u_z, w_r, u_r, w_h, u_h, w_star;
};

GgnnWeights bind_ggnn(nn::Tape& tape, nn::ParameterStore& store, const std::string& prefix);

/// Several Levi graphs stacked into one block-diagonal batch.
struct GraphBatch {
  std::shared_ptr<const nn::SparseMatrix> adjacency;
  std::vector<int> node_ids;    // vocabulary id per stacked node
  std::vector<int> segment;     // graph index per stacked node
  std::vector<int> offsets;     // first stacked row of each graph, plus the total
  int num_graphs = 0;
};

/// Vocabulary ids of the Levi nodes; an unknown token raises VocabError.
std::vector<int> node_ids(const graph::LeviGraph& levi, const text::Vocab& vocab);

GraphBatch make_batch(const std::vector<const graph::LeviGraph*>& graphs, const text::Vocab& vocab);
/// Batch from explicit adjacency matrices and ids (used for tests with
/// hand-built graphs).
GraphBatch make_batch(const std::vector<nn::Matrix>& adjacency, const std::vector<std::vector<int>>& ids);

struct GraphEncoding {
  nn::Var g0;      // initial node embeddings, stacked
  nn::Var gn;      // after the hops
  nn::Var gstar;   // W_*[G_0; G_n], one row per node
  nn::Var pooled;  // mean of gstar rows, one row per graph
};

/// n hops of gated propagation with a^{v,u}-weighted aggregation over
/// in-neighbors, then augmentation and per-graph mean pooling.
GraphEncoding ggnn_encode(nn::Tape& tape, nn::Var embedding, const GgnnWeights& w, const GraphBatch& batch, int hops);

}  // namespace mwpgen::encoder
