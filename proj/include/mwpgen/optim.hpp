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

#include <cstdint>
#include <map>
#include <string>

#include "mwpgen/rng.hpp"
#include "mwpgen/tensor.hpp"

namespace mwpgen::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update over every parameter in the store, reading
/// Parameter::grad. A non-finite gradient aborts with the parameter's name
/// before any parameter is touched.
void adam_step(ParameterStore& params, AdamState& state);

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(ParameterStore& params, double max_norm);

/// I.i.d. N(0, std^2) entries; std is a standard deviation.
Matrix init_normal(Eigen::Index rows, Eigen::Index cols, double std, Rng& rng);
Matrix init_normal(Eigen::Index rows, Eigen::Index cols, double std, std::uint64_t seed);

}  // namespace mwpgen::nn
