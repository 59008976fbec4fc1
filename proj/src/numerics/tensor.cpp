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

#include "mwpgen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mwpgen/error.hpp"

namespace mwpgen::nn {

Tensor::Tensor(std::size_t rows, std::size_t cols, bool requires_grad)
    : value_(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))),
      requires_grad_(requires_grad) {
  require(rows > 0 && cols > 0, ErrorCode::kDimension, "tensor dimensions must be positive");
}

Tensor::Tensor(Matrix value, bool requires_grad) : value_(std::move(value)), requires_grad_(requires_grad) {}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.begin()->size());
  value_.resize(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    require(static_cast<Eigen::Index>(row.size()) == c, ErrorCode::kDimension, "ragged tensor literal");
    Eigen::Index j = 0;
    for (double v : row) value_(i, j++) = v;
    ++i;
  }
}

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << "[" << m.rows() << "x" << m.cols() << "]";
  return os.str();
}

// --- ParameterStore --------------------------------------------------------

Parameter& ParameterStore::add(const std::string& name, Matrix init) {
  require(!contains(name), ErrorCode::kContract, "duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kContract, "unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kContract, "unknown parameter '" + name + "'");
  return *params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero(p->value.rows(), p->value.cols());
}

// --- Tape ------------------------------------------------------------------

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::leaf(const Tensor& t) {
  Node n;
  n.value = t.matrix();
  n.requires_grad = record_ && t.requires_grad();
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, BackwardFn fn) {
  require(value.allFinite(), ErrorCode::kNumeric, "non-finite value produced by a forward op");
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& v : inputs) {
      if (nodes_[static_cast<std::size_t>(v.id())].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) {
      n.inputs.reserve(inputs.size());
      for (const Var& v : inputs) n.inputs.push_back(v.id());
      n.backward = std::move(fn);
    }
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Matrix* Tape::grad_sink(Var input) {
  Node& n = nodes_[static_cast<std::size_t>(input.id())];
  if (!n.requires_grad) return nullptr;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return &n.grad;
}

void Tape::backward(Var loss) {
  require(loss.tape() == this, ErrorCode::kContract, "loss belongs to a different tape");
  require(!consumed_, ErrorCode::kContract, "tape already differentiated; rebuild the forward pass");
  require(!nodes_.empty(), ErrorCode::kContract, "backward on an empty tape");
  const Matrix& lv = loss.value();
  require(lv.rows() == 1 && lv.cols() == 1, ErrorCode::kContract,
          "backward needs a scalar loss, got " + shape_string(lv));
  consumed_ = true;
  Node& root = nodes_[static_cast<std::size_t>(loss.id())];
  if (!root.requires_grad) return;
  root.grad = Matrix::Ones(1, 1);
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, i);
    }
  }
}

const Matrix& Tape::grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  require(n.grad.size() != 0, ErrorCode::kContract, "no gradient recorded for node");
  return n.grad;
}

bool Tape::has_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].grad.size() != 0; }

// --- kernels -----------------------------------------------------------------

Matrix sigmoid_values(const Matrix& x) {
  Eigen::ArrayXXd a = x.array();
  Eigen::ArrayXXd t = (-a.abs()).exp();
  Eigen::ArrayXXd pos = 1.0 / (1.0 + t);
  Eigen::ArrayXXd neg = t / (1.0 + t);
  Matrix out = (a >= 0.0).select(pos, neg).matrix();
  return out;
}

Matrix tanh_values(const Matrix& x) {
  Eigen::ArrayXXd a = x.array();
  Eigen::ArrayXXd t = (-2.0 * a.abs()).exp();
  Matrix out = (((1.0 - t) / (1.0 + t)) * a.sign()).matrix();
  return out;
}

Matrix softmax_values(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

// --- ops -------------------------------------------------------------------

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  require(a.tape() == b.tape() && a.tape() != nullptr, ErrorCode::kContract,
          std::string(op) + ": operands live on different tapes");
}

[[noreturn]] void dim_error(const char* op, const Matrix& a, const Matrix& b) {
  fail(ErrorCode::kDimension, std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void check_same_shape(Var a, Var b, const char* op) {
  check_same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) dim_error(op, a.value(), b.value());
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) dim_error("matmul", a.value(), b.value());
  Matrix out;
  out.noalias() = a.value() * b.value();
  return a.tape()->push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) ga->noalias() += g * b.value().transpose();
    if (Matrix* gb = t.grad_sink(b)) gb->noalias() += a.value().transpose() * g;
  });
}

Var sparse_matmul(std::shared_ptr<const SparseMatrix> a, Var b) {
  if (a->cols() != b.rows()) {
    fail(ErrorCode::kDimension, "sparse_matmul: incompatible shapes [" + std::to_string(a->rows()) + "x" +
                                    std::to_string(a->cols()) + "] and " + shape_string(b.value()));
  }
  Matrix out = *a * b.value();
  return b.tape()->push(std::move(out), {b}, [a, b](Tape& t, int self) {
    if (Matrix* gb = t.grad_sink(b)) *gb += a->transpose() * t.out_grad(self);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  return a.tape()->push(a.value() + b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) *ga += g;
    if (Matrix* gb = t.grad_sink(b)) *gb += g;
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return a.tape()->push(a.value() - b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) *ga += g;
    if (Matrix* gb = t.grad_sink(b)) *gb -= g;
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) *ga += g.cwiseProduct(b.value());
    if (Matrix* gb = t.grad_sink(b)) *gb += g.cwiseProduct(a.value());
  });
}

Var add_row(Var a, Var row) {
  check_same_tape(a, row, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) dim_error("add_row", a.value(), row.value());
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->push(std::move(out), {a, row}, [a, row](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) *ga += g;
    if (Matrix* gr = t.grad_sink(row)) *gr += g.colwise().sum();
  });
}

Var mul_col(Var a, Var col) {
  check_same_tape(a, col, "mul_col");
  if (col.cols() != 1 || col.rows() != a.rows()) dim_error("mul_col", a.value(), col.value());
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return a.tape()->push(std::move(out), {a, col}, [a, col](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) *ga += (g.array().colwise() * col.value().col(0).array()).matrix();
    if (Matrix* gc = t.grad_sink(col)) *gc += g.cwiseProduct(a.value()).rowwise().sum();
  });
}

Var affine(Var a, double alpha, double beta) {
  Matrix out = (alpha * a.value().array() + beta).matrix();
  return a.tape()->push(std::move(out), {a}, [a, alpha](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) *ga += alpha * t.out_grad(self);
  });
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var concat(std::span<const Var> parts) {
  require(!parts.empty(), ErrorCode::kContract, "concat of nothing");
  Tape* tape = parts[0].tape();
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat");
    if (p.rows() != rows) dim_error("concat", parts[0].value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return tape->push(std::move(out), parts, [saved](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    Eigen::Index o = 0;
    for (const Var& p : saved) {
      if (Matrix* gp = t.grad_sink(p)) *gp += g.middleCols(o, p.cols());
      o += p.cols();
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), ErrorCode::kContract, "concat_rows of nothing");
  Tape* tape = parts[0].tape();
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat_rows");
    if (p.cols() != cols) dim_error("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return tape->push(std::move(out), parts, [saved](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    Eigen::Index o = 0;
    for (const Var& p : saved) {
      if (Matrix* gp = t.grad_sink(p)) *gp += g.middleRows(o, p.rows());
      o += p.rows();
    }
  });
}


Var sigmoid(Var a) {
  return a.tape()->push(sigmoid_values(a.value()), {a}, [a](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) {
      const Matrix& y = t.value(self);
      *ga += (t.out_grad(self).array() * y.array() * (1.0 - y.array())).matrix();
    }
  });
}

Var tanh(Var a) {
  return a.tape()->push(tanh_values(a.value()), {a}, [a](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) {
      const Matrix& y = t.value(self);
      *ga += (t.out_grad(self).array() * (1.0 - y.array().square())).matrix();
    }
  });
}

Var exp(Var a) {
  return a.tape()->push(a.value().array().exp().matrix(), {a}, [a](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) *ga += t.out_grad(self).cwiseProduct(t.value(self));
  });
}

Var softmax(Var a) {
  return a.tape()->push(softmax_values(a.value()), {a}, [a](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) {
      const Matrix& y = t.value(self);
      const Matrix& g = t.out_grad(self);
      Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
      *ga += (y.array() * (g.array().colwise() - dots.array())).matrix();
    }
  });
}

Var mean_rows(Var a) {
  const double n = static_cast<double>(a.rows());
  // Running mean: exact when every row is identical.
  const Matrix& x = a.value();
  Matrix out = x.row(0);
  for (Eigen::Index r = 1; r < x.rows(); ++r) out += (x.row(r) - out) / static_cast<double>(r + 1);
  return a.tape()->push(std::move(out), {a}, [a, n](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) ga->rowwise() += t.out_grad(self).row(0) / n;
  });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->push(std::move(out), {a}, [a](Tape& t, int self) {
    if (Matrix* ga = t.grad_sink(a)) ga->array() += t.out_grad(self)(0, 0);
  });
}

Var slice(Var a, Eigen::Index col_begin, Eigen::Index col_end) {
  if (col_begin < 0 || col_end > a.cols() || col_begin >= col_end) {
    fail(ErrorCode::kDimension, "slice: columns [" + std::to_string(col_begin) + ", " + std::to_string(col_end) +
                                    ") out of range for " + shape_string(a.value()));
  }
  Matrix out = a.value().middleCols(col_begin, col_end - col_begin);
  return a.tape()->push(std::move(out), {a}, [a, col_begin](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) ga->middleCols(col_begin, g.cols()) += g;
  });
}

Var slice_rows(Var a, Eigen::Index row_begin, Eigen::Index row_end) {
  if (row_begin < 0 || row_end > a.rows() || row_begin >= row_end) {
    fail(ErrorCode::kDimension, "slice_rows: rows [" + std::to_string(row_begin) + ", " + std::to_string(row_end) +
                                    ") out of range for " + shape_string(a.value()));
  }
  Matrix out = a.value().middleRows(row_begin, row_end - row_begin);
  return a.tape()->push(std::move(out), {a}, [a, row_begin](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (Matrix* ga = t.grad_sink(a)) ga->middleRows(row_begin, g.rows()) += g;
  });
}

Var embed_lookup(Var table, std::span<const int> ids) {
  require(!ids.empty(), ErrorCode::kContract, "embed_lookup with no ids");
  Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      fail(ErrorCode::kDimension, "embed_lookup: id " + std::to_string(ids[i]) + " outside table " +
                                      shape_string(table.value()));
    }
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return table.tape()->push(std::move(out), {table}, [table, saved = std::move(saved)](Tape& t, int self) {
    if (Matrix* gt = t.grad_sink(table)) {
      const Matrix& g = t.out_grad(self);
      for (std::size_t i = 0; i < saved.size(); ++i) gt->row(saved[i]) += g.row(static_cast<Eigen::Index>(i));
    }
  });
}

Var repeat_rows(Var row, Eigen::Index n) {
  if (row.rows() != 1 || n < 1) fail(ErrorCode::kDimension, "repeat_rows: expected a single row, got " + shape_string(row.value()));
  Matrix out = row.value().replicate(n, 1);
  return row.tape()->push(std::move(out), {row}, [row](Tape& t, int self) {
    if (Matrix* gr = t.grad_sink(row)) *gr += t.out_grad(self).colwise().sum();
  });
}

namespace {
void check_segments(std::span<const int> segment, Eigen::Index rows, int num_segments, const char* op) {
  if (static_cast<Eigen::Index>(segment.size()) != rows) {
    fail(ErrorCode::kDimension, std::string(op) + ": " + std::to_string(segment.size()) + " segment ids for " +
                                    std::to_string(rows) + " rows");
  }
  for (int s : segment) {
    if (s < 0 || s >= num_segments) fail(ErrorCode::kDimension, std::string(op) + ": segment id out of range");
  }
}
}  // namespace

Var segment_softmax(Var scores, std::span<const int> segment, int num_segments) {
  if (scores.cols() != 1) fail(ErrorCode::kDimension, "segment_softmax: expected a column, got " + shape_string(scores.value()));
  check_segments(segment, scores.rows(), num_segments, "segment_softmax");
  const Matrix& x = scores.value();
  std::vector<double> mx(static_cast<std::size_t>(num_segments), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segment.size(); ++i) mx[segment[i]] = std::max(mx[segment[i]], x(static_cast<Eigen::Index>(i), 0));
  Matrix out(x.rows(), 1);
  std::vector<double> total(static_cast<std::size_t>(num_segments), 0.0);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const double e = std::exp(x(static_cast<Eigen::Index>(i), 0) - mx[segment[i]]);
    out(static_cast<Eigen::Index>(i), 0) = e;
    total[segment[i]] += e;
  }
  for (std::size_t i = 0; i < segment.size(); ++i) out(static_cast<Eigen::Index>(i), 0) /= total[segment[i]];
  std::vector<int> seg(segment.begin(), segment.end());
  return scores.tape()->push(std::move(out), {scores}, [scores, seg = std::move(seg), num_segments](Tape& t, int self) {
    Matrix* gs = t.grad_sink(scores);
    if (!gs) return;
    const Matrix& y = t.value(self);
    const Matrix& g = t.out_grad(self);
    std::vector<double> dot(static_cast<std::size_t>(num_segments), 0.0);
    for (std::size_t i = 0; i < seg.size(); ++i) dot[seg[i]] += g(static_cast<Eigen::Index>(i), 0) * y(static_cast<Eigen::Index>(i), 0);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      (*gs)(r, 0) += y(r, 0) * (g(r, 0) - dot[seg[i]]);
    }
  });
}

Var segment_weighted_sum(Var weights, Var values, std::span<const int> segment, int num_segments) {
  check_same_tape(weights, values, "segment_weighted_sum");
  if (weights.cols() != 1 || weights.rows() != values.rows()) dim_error("segment_weighted_sum", weights.value(), values.value());
  check_segments(segment, values.rows(), num_segments, "segment_weighted_sum");
  Matrix out = Matrix::Zero(num_segments, values.cols());
  const Matrix& w = weights.value();
  const Matrix& v = values.value();
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.row(segment[i]) += w(r, 0) * v.row(r);
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return weights.tape()->push(std::move(out), {weights, values}, [weights, values, seg = std::move(seg)](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    Matrix* gw = t.grad_sink(weights);
    Matrix* gv = t.grad_sink(values);
    const Matrix& w = weights.value();
    const Matrix& v = values.value();
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (gw) (*gw)(r, 0) += g.row(seg[i]).dot(v.row(r));
      if (gv) gv->row(r) += w(r, 0) * g.row(seg[i]);
    }
  });
}

Var attention_scores(Var query, Var keys, Var v, std::span<const int> segment) {
  check_same_tape(query, keys, "attention_scores");
  check_same_tape(query, v, "attention_scores");
  if (query.cols() != keys.cols()) dim_error("attention_scores", query.value(), keys.value());
  if (v.rows() != keys.cols() || v.cols() != 1) dim_error("attention_scores", keys.value(), v.value());
  check_segments(segment, keys.rows(), static_cast<int>(query.rows()), "attention_scores");
  Matrix pre = keys.value();
  for (std::size_t i = 0; i < segment.size(); ++i) pre.row(static_cast<Eigen::Index>(i)) += query.value().row(segment[i]);
  auto hidden = std::make_shared<Matrix>(tanh_values(pre));
  Matrix out;
  out.noalias() = *hidden * v.value();
  std::vector<int> seg(segment.begin(), segment.end());
  return query.tape()->push(std::move(out), {query, keys, v},
                            [query, keys, v, hidden, seg = std::move(seg)](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);  // M x 1
    if (Matrix* gv = t.grad_sink(v)) gv->noalias() += hidden->transpose() * g;
    Matrix* gk = t.grad_sink(keys);
    Matrix* gq = t.grad_sink(query);
    if (!gk && !gq) return;
    Matrix dpre = (g * v.value().transpose()).cwiseProduct((1.0 - hidden->array().square()).matrix());
    if (gk) *gk += dpre;
    if (gq) {
      for (std::size_t i = 0; i < seg.size(); ++i) gq->row(seg[i]) += dpre.row(static_cast<Eigen::Index>(i));
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> targets, std::span<const double> weights) {
  const Matrix& x = logits.value();
  if (static_cast<Eigen::Index>(targets.size()) != x.rows() || targets.size() != weights.size()) {
    fail(ErrorCode::kDimension, "cross_entropy: " + std::to_string(targets.size()) + " targets for logits " + shape_string(x));
  }
  auto probs = std::make_shared<Matrix>(softmax_values(x));
  double loss = 0.0;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    if (weights[b] == 0.0) continue;
    const auto r = static_cast<Eigen::Index>(b);
    require(targets[b] >= 0 && targets[b] < x.cols(), ErrorCode::kDimension, "cross_entropy: target id out of range");
    const double mx = x.row(r).maxCoeff();
    const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    loss += weights[b] * (lse - x(r, targets[b]));
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  std::vector<int> tg(targets.begin(), targets.end());
  std::vector<double> wt(weights.begin(), weights.end());
  return logits.tape()->push(std::move(out), {logits}, [logits, probs, tg = std::move(tg), wt = std::move(wt)](Tape& t, int self) {
    Matrix* gl = t.grad_sink(logits);
    if (!gl) return;
    const double g = t.out_grad(self)(0, 0);
    for (std::size_t b = 0; b < tg.size(); ++b) {
      if (wt[b] == 0.0) continue;
      const auto r = static_cast<Eigen::Index>(b);
      gl->row(r) += (g * wt[b]) * probs->row(r);
      (*gl)(r, tg[b]) -= g * wt[b];
    }
  });
}

Var forward_op(OpKind kind, std::span<const Var> in, const OpAttrs& attrs) {
  auto need = [&](std::size_t n, const char* op) {
    if (in.size() != n) fail(ErrorCode::kContract, std::string(op) + " takes " + std::to_string(n) + " inputs");
  };
  switch (kind) {
    case OpKind::kMatmul: need(2, "matmul"); return matmul(in[0], in[1]);
    case OpKind::kAdd: need(2, "add"); return add(in[0], in[1]);
    case OpKind::kMul: need(2, "mul"); return mul(in[0], in[1]);
    case OpKind::kConcat: return concat(in);
    case OpKind::kSigmoid: need(1, "sigmoid"); return sigmoid(in[0]);
    case OpKind::kTanh: need(1, "tanh"); return tanh(in[0]);
    case OpKind::kSoftmax: need(1, "softmax"); return softmax(in[0]);
    case OpKind::kMeanRows: need(1, "mean_rows"); return mean_rows(in[0]);
    case OpKind::kSlice: need(1, "slice"); return slice(in[0], attrs.begin, attrs.end);
    case OpKind::kEmbedLookup: need(1, "embed_lookup"); return embed_lookup(in[0], attrs.ids);
  }
  fail(ErrorCode::kContract, "unknown op kind");
}

}  // namespace mwpgen::nn
