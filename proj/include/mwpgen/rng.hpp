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
#include <optional>
#include <span>
#include <utility>

namespace mwpgen {

/// xoshiro256** seeded through splitmix64.
///
/// Every stochastic choice in the project (initialization, corpus sampling,
/// shuffling, scheduled sampling, latent draws) goes through this generator so
/// that results are reproducible across standard libraries:
///   - uniform()   = (next() >> 11) * 2^-53, in [0, 1)
///   - normal()    = Box-Muller on (1 - uniform(), uniform()); the sine branch
///                   is cached and returned by the following call
///   - below(n)    = rejection sampling on next() to remove modulo bias
///   - shuffle()   = Fisher-Yates from the back, j = below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive bounds
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  std::optional<double> cached_normal_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace mwpgen
