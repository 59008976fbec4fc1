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

#include "mwpgen/optim.hpp"

#include <cmath>

#include "mwpgen/error.hpp"

namespace mwpgen::nn {

void adam_step(ParameterStore& params, AdamState& state) {
  const AdamConfig& c = state.config;
  require(c.lr > 0.0, ErrorCode::kContract, "Adam learning rate must be positive");
  for (const Parameter* p : std::as_const(params).all()) {
    require(p->grad.rows() == p->value.rows() && p->grad.cols() == p->value.cols(), ErrorCode::kDimension,
            "gradient shape mismatch for '" + p->name + "'");
    if (!p->grad.allFinite()) fail(ErrorCode::kNumeric, "non-finite gradient in parameter '" + p->name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (Parameter* p : params.all()) {
    Matrix& m = state.first_moment[p->name];
    Matrix& v = state.second_moment[p->name];
    if (m.size() == 0) m = Matrix::Zero(p->value.rows(), p->value.cols());
    if (v.size() == 0) v = Matrix::Zero(p->value.rows(), p->value.cols());
    m = c.beta1 * m + (1.0 - c.beta1) * p->grad;
    v = c.beta2 * v + (1.0 - c.beta2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
  }
}

double clip_grad_norm(ParameterStore& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : std::as_const(params).all()) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Parameter* p : params.all()) p->grad *= scale;
  }
  return norm;
}

Matrix init_normal(Eigen::Index rows, Eigen::Index cols, double std, Rng& rng) {
  require(std > 0.0, ErrorCode::kContract, "init_normal needs std > 0");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std * rng.normal();
  return m;
}

Matrix init_normal(Eigen::Index rows, Eigen::Index cols, double std, std::uint64_t seed) {
  Rng rng(seed);
  return init_normal(rows, cols, std, rng);
}

}  // namespace mwpgen::nn
