// Copyright 2026 The lorafair Authors.
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

#include <cstddef>
#include <cstdint>

#include "lorafair/matrix.hpp"
#include "lorafair/rng.hpp"

namespace lorafair {

/// Default standard deviation of the Gaussian A factor at initialization.
inline constexpr double kDefaultInitStd = 0.02;

/// One low-rank adapter: the update it represents is B * A, with B of shape
/// d x r and A of shape r x l. No alpha/r scaling is applied.
class LoraPair {
 public:
  /// Throws DimensionError unless b.cols() == a.rows() and the rank does not
  /// exceed min(d, l).
  LoraPair(Matrix b, Matrix a);

  const Matrix& b() const noexcept { return b_; }
  const Matrix& a() const noexcept { return a_; }
  std::size_t rank() const noexcept { return a_.rows(); }
  std::size_t out_dim() const noexcept { return b_.rows(); }
  std::size_t in_dim() const noexcept { return a_.cols(); }

  friend bool operator==(const LoraPair&, const LoraPair&) = default;

 private:
  Matrix b_;
  Matrix a_;
};

/// A ~ N(0, std^2) of shape rank x l, B = 0 of shape d x rank.
LoraPair init_pair(std::size_t d, std::size_t l, std::size_t rank, double std_dev, RngSeed seed);

/// B * A, shape d x l.
Matrix effective_update(const LoraPair& pair);

/// Trainable parameters of a pair: r * (d + l).
std::int64_t param_count(const LoraPair& pair);
/// Same count from dimensions; rank 0 is rejected.
std::int64_t param_count(std::size_t d, std::size_t l, std::size_t rank);

/// Frozen pre-trained weight W0 (d x l).
class FrozenBase {
 public:
  explicit FrozenBase(Matrix weights) : weights_(std::move(weights)) {}
  const Matrix& weights() const noexcept { return weights_; }
  friend bool operator==(const FrozenBase&, const FrozenBase&) = default;

 private:
  Matrix weights_;
};

/// New base holding W0 + delta.
FrozenBase fold_into_base(const FrozenBase& base, const Matrix& delta);

/// W0 + B * A: the weight the model actually evaluates with.
Matrix merged_weights(const FrozenBase& base, const LoraPair& pair);

}  // namespace lorafair
