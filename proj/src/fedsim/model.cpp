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

#include "lorafair/model.hpp"

#include <algorithm>
#include <cmath>

#include "lorafair/errors.hpp"

namespace lorafair {

Matrix logits(const Matrix& weights, const Matrix& inputs) { return matmul_nt(inputs, weights); }

LossAndGradient softmax_cross_entropy(const Matrix& weights, const Matrix& inputs,
                                      std::span<const int> labels) {
  if (inputs.rows() != labels.size()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(inputs.rows()) +
                         " inputs but " + std::to_string(labels.size()) + " labels");
  }
  Matrix z = logits(weights, inputs);  // becomes (softmax - onehot) / n in place
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = z.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double norm = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      norm += v;
    }
    const auto y = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || y >= d) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    loss -= std::log(row[y] / norm);
    for (double& v : row) v = v / norm * inv_n;
    row[y] -= inv_n;
  }
  return {loss * inv_n, matmul_tn(z, inputs)};
}

AdapterGradient adapter_gradient(const FrozenBase& base, const LoraPair& pair,
                                 const Matrix& inputs, std::span<const int> labels) {
  auto [loss, g] = softmax_cross_entropy(merged_weights(base, pair), inputs, labels);
  return {loss, matmul_nt(g, pair.a()), matmul_tn(pair.b(), g)};
}

std::vector<int> predict(const Matrix& weights, const Matrix& inputs) {
  const Matrix z = logits(weights, inputs);
  std::vector<int> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const Matrix& weights, const Matrix& inputs, std::span<const int> labels) {
  const auto pred = predict(weights, inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace lorafair
