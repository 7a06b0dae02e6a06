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

#include <vector>

#include "lorafair/matrix.hpp"

namespace lorafair {

/// Which averaged factor receives the server-side residual.
enum class ResidualPosition { kOnB, kOnA };

/// Penalty applied to the residual: lambda*|D|_F or lambda*|D|_F^2.
enum class RegularizerNorm { kFrobenius, kFrobeniusSquared };

struct SolverConfig {
  double learning_rate = 0.1;
  int max_steps = 500;
  double lambda = 0.01;
  double grad_tol = 1e-7;
  double norm_guard_eps = 1e-12;
  ResidualPosition residual_position = ResidualPosition::kOnB;
  RegularizerNorm norm = RegularizerNorm::kFrobenius;
};

/// Throws std::invalid_argument for lambda < 0, max_steps < 1 or
/// non-positive rates/tolerances.
void validate(const SolverConfig& cfg);

struct SolverReport {
  Matrix delta;                 ///< residual on B (d x r) or on A (r x l)
  int steps_taken = 0;          ///< accepted descent steps
  double initial_cosine = 0.0;  ///< S(dW, B_bar A_bar)
  double final_cosine = 0.0;    ///< S(dW, realized update with residual)
  double final_delta_norm = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double regularizer_similarity = 1.0;  ///< S(factor, factor + delta)
  bool converged = false;               ///< gradient norm fell below grad_tol
  std::vector<double> loss_trace;       ///< loss after each accepted step, starting with initial_loss
};

/// (1 - S(dW, (B_bar + delta_b) A_bar)) + lambda * |delta_b|_F, evaluated by
/// composing matrix primitives. Throws DegenerateInputError when |dW|_F or the
/// realized update's norm is below 1e-12.
double objective(const Matrix& delta_b, const Matrix& dw, const Matrix& a_bar,
                 const Matrix& b_bar, double lambda,
                 RegularizerNorm norm = RegularizerNorm::kFrobenius);

/// Analytic gradient of objective() with respect to delta_b.
///
/// With M = (B_bar + delta_b) A_bar, u = vec(M), v = vec(dW):
///   d(1 - cos)/d delta_b = -[v/(|u||v|) - (<u,v>/(|u|^3 |v|)) u] * A_bar^T
/// and the regularizer contributes lambda * delta_b / max(|delta_b|, eps).
Matrix gradient(const Matrix& delta_b, const Matrix& dw, const Matrix& a_bar,
                const Matrix& b_bar, double lambda, double norm_guard_eps = 1e-12,
                RegularizerNorm norm = RegularizerNorm::kFrobenius);

/// Minimizes the residual objective by gradient descent from a zero residual.
///
/// A trial step that does not strictly lower the loss is halved until it
/// does; each accepted step doubles the next trial size. Stops when the
/// gradient norm drops below grad_tol, after max_steps accepted steps, or
/// when no trial step lowers the loss. With kOnA the residual is added to
/// A_bar instead and the problem is solved in transposed form.
SolverReport solve(const Matrix& dw, const Matrix& a_bar, const Matrix& b_bar,
                   const SolverConfig& cfg);

struct ProjectionOptimum {
  Matrix x_star;           ///< dW A^T (A A^T)^-1, the best factor to pair with A_bar
  double cos_star = 0.0;   ///< |x_star A_bar|_F / |dW|_F
};

/// Closed-form maximum of S(dW, X A_bar) over all X (lambda = 0 optimum).
/// Throws DegenerateInputError when A_bar's smallest singular value is at or
/// below 1e-8.
ProjectionOptimum projection_oracle(const Matrix& dw, const Matrix& a_bar);

}  // namespace lorafair
