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

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mwpgen::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Dense row-major array of doubles. Every tensor in the model is a matrix;
/// vectors are stored as 1 x n rows and scalars as 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, bool requires_grad = false);
  explicit Tensor(Matrix value, bool requires_grad = false);
  Tensor(std::initializer_list<std::initializer_list<double>> rows);

  std::vector<std::size_t> shape() const { return {rows(), cols()}; }
  std::size_t rows() const { return static_cast<std::size_t>(value_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(value_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(value_.size()); }

  std::span<const double> data() const { return {value_.data(), size()}; }
  std::span<double> data() { return {value_.data(), size()}; }

  const Matrix& matrix() const { return value_; }
  Matrix& matrix() { return value_; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  double operator()(std::size_t r, std::size_t c) const { return value_(r, c); }

 private:
  Matrix value_;
  bool requires_grad_ = false;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Named trainable parameters in insertion order. The store doubles as the
/// gradient map filled by Tape::backward.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

std::string shape_string(const Matrix& m);

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order;
/// backward visits them in exact reverse insertion order. A tape records one
/// forward pass and may be differentiated once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);
  /// A differentiable leaf that is not a named parameter; its gradient is
  /// read back with grad().
  Var leaf(const Tensor& t);

  void backward(Var loss);
  const Matrix& grad(Var v) const;
  bool has_grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return record_; }

  // Op construction helpers.
  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  Var push(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var push(Matrix value, std::span<const Var> inputs, BackwardFn fn);
  /// Gradient of the node being differentiated.
  const Matrix& out_grad(int self) const { return nodes_[static_cast<std::size_t>(self)].grad; }
  /// Accumulation target for an input's gradient; null when it needs none.
  Matrix* grad_sink(Var input);
  int input(int self, std::size_t k) const { return nodes_[static_cast<std::size_t>(self)].inputs[k]; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_ = true;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Shapes are checked eagerly; a mismatch raises a
// DimensionError naming the op and both shapes.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// Constant sparse matrix times a tensor (block-diagonal batched adjacency).
Var sparse_matmul(std::shared_ptr<const SparseMatrix> a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a (n x d) + row (1 x d) broadcast over rows.
Var add_row(Var a, Var row);
/// a (n x d) scaled row-wise by col (n x 1).
Var mul_col(Var a, Var col);
/// alpha * a + beta, elementwise.
Var affine(Var a, double alpha, double beta);
Var concat(std::span<const Var> parts);  // along columns
Var concat(std::initializer_list<Var> parts);
Var concat_rows(std::span<const Var> parts);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var softmax(Var a);  // row-wise
Var mean_rows(Var a);
Var sum(Var a);
Var slice(Var a, Eigen::Index col_begin, Eigen::Index col_end);
Var slice_rows(Var a, Eigen::Index row_begin, Eigen::Index row_end);
/// Rows of the table selected by ids; backward scatters into the table.
Var embed_lookup(Var table, std::span<const int> ids);
/// Row-replicates a 1 x d tensor n times.
Var repeat_rows(Var row, Eigen::Index n);

/// Softmax over groups of rows of a column vector; segment[i] names the
/// group of row i.
Var segment_softmax(Var scores, std::span<const int> segment, int num_segments);
/// out[s] = sum_{i: segment[i] = s} weights[i] * values[i].
Var segment_weighted_sum(Var weights, Var values, std::span<const int> segment, int num_segments);
/// score[i] = v . tanh(query[segment[i]] + keys[i]); fused to keep the tape
/// small for batched attention.
Var attention_scores(Var query, Var keys, Var v, std::span<const int> segment);
/// sum_b weight[b] * -log softmax(logits[b])[target[b]].
Var cross_entropy(Var logits, std::span<const int> targets, std::span<const double> weights);

/// The elementary op kinds, dispatched through forward_op.
enum class OpKind { kMatmul, kAdd, kMul, kConcat, kSigmoid, kTanh, kSoftmax, kMeanRows, kSlice, kEmbedLookup };

struct OpAttrs {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  std::vector<int> ids;
};

Var forward_op(OpKind kind, std::span<const Var> inputs, const OpAttrs& attrs = {});

// Numerically stable elementwise kernels shared with non-tape code.
Matrix sigmoid_values(const Matrix& x);
Matrix tanh_values(const Matrix& x);
Matrix softmax_values(const Matrix& x);

}  // namespace mwpgen::nn
