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

#include "lorafair/lora.hpp"

#include <algorithm>

#include "lorafair/errors.hpp"

namespace lorafair {

LoraPair::LoraPair(Matrix b, Matrix a) : b_(std::move(b)), a_(std::move(a)) {
  if (b_.empty() || a_.empty() || b_.cols() != a_.rows()) {
    throw DimensionError("LoraPair: B " + b_.shape_string() + " and A " + a_.shape_string() +
                         " do not share the rank dimension");
  }
  if (rank() > std::min(out_dim(), in_dim())) {
    throw DimensionError("LoraPair: rank " + std::to_string(rank()) + " exceeds min(d, l) for " +
                         std::to_string(out_dim()) + "x" + std::to_string(in_dim()));
  }
}

LoraPair init_pair(std::size_t d, std::size_t l, std::size_t rank, double std_dev, RngSeed seed) {
  if (rank == 0 || rank > std::min(d, l)) {
    throw DimensionError("init_pair: rank " + std::to_string(rank) + " outside [1, min(d, l)=" +
                         std::to_string(std::min(d, l)) + "]");
  }
  return LoraPair(Matrix::zeros(d, rank), gaussian_fill(rank, l, std_dev, seed));
}

Matrix effective_update(const LoraPair& pair) { return matmul(pair.b(), pair.a()); }

std::int64_t param_count(const LoraPair& pair) {
  return param_count(pair.out_dim(), pair.in_dim(), pair.rank());
}

std::int64_t param_count(std::size_t d, std::size_t l, std::size_t rank) {
  if (rank == 0) throw DimensionError("param_count: rank must be positive");
  return static_cast<std::int64_t>(rank) * static_cast<std::int64_t>(d + l);
}

FrozenBase fold_into_base(const FrozenBase& base, const Matrix& delta) {
  if (base.weights().rows() != delta.rows() || base.weights().cols() != delta.cols()) {
    throw DimensionError("fold_into_base: base " + base.weights().shape_string() +
                         " vs delta " + delta.shape_string());
  }
  return FrozenBase(add(base.weights(), delta));
}

Matrix merged_weights(const FrozenBase& base, const LoraPair& pair) {
  return add(base.weights(), effective_update(pair));
}

}  // namespace lorafair
