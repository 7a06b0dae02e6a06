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

#include <span>
#include <vector>

#include "lorafair/lora.hpp"
#include "lorafair/matrix.hpp"

namespace lorafair {

// Linear classifier logits = W x with softmax cross-entropy, W = W0 + B A.

/// n x d logits for the rows of inputs (n x l).
Matrix logits(const Matrix& weights, const Matrix& inputs);

struct LossAndGradient {
  double loss = 0.0;  ///< mean cross-entropy
  Matrix grad_w;      ///< dL/dW, d x l
};

/// Mean softmax cross-entropy and its gradient with respect to W.
LossAndGradient softmax_cross_entropy(const Matrix& weights, const Matrix& inputs,
                                      std::span<const int> labels);

struct AdapterGradient {
  double loss = 0.0;
  Matrix grad_b;  ///< G A^T
  Matrix grad_a;  ///< B^T G
};

/// Loss of W0 + B A and its gradients with respect to both factors.
AdapterGradient adapter_gradient(const FrozenBase& base, const LoraPair& pair,
                                 const Matrix& inputs, std::span<const int> labels);

/// Argmax class per row.
std::vector<int> predict(const Matrix& weights, const Matrix& inputs);

/// Fraction of rows whose argmax matches the label.
double accuracy(const Matrix& weights, const Matrix& inputs, std::span<const int> labels);

}  // namespace lorafair
