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
#include <vector>

#include "lorafair/matrix.hpp"

namespace lorafair {

/// Thin singular value decomposition m ~= u * diag(s) * v^T.
struct SvdResult {
  Matrix u;               ///< rows x k, orthonormal columns
  std::vector<double> s;  ///< k values, descending, nonnegative
  Matrix v;               ///< cols x k, orthonormal columns
  int sweeps = 0;
};

struct SvdOptions {
  double tolerance = 1e-10;  ///< max |<w_p, w_q>| / (|w_p| |w_q|) at convergence
  int max_sweeps = 100;
};

/// Largest side accepted by truncated_svd.
inline constexpr std::size_t kMaxSvdSide = 1024;

/// Leading k singular triplets via one-sided (Hestenes) Jacobi.
///
/// u * diag(s) * v^T is the best rank-k Frobenius approximation of m. When m
/// has fewer than k nonzero singular values, the extra columns of u are an
/// arbitrary orthonormal completion. Throws DimensionError for k outside
/// [1, min(rows, cols)] or a side above kMaxSvdSide, ConvergenceError if the
/// sweep cap is hit.
SvdResult truncated_svd(const Matrix& m, std::size_t k, const SvdOptions& options = {});

/// u * diag(s) * v^T
Matrix reconstruct(const SvdResult& svd);

/// Solves a * x = b for symmetric positive-definite a via Cholesky.
/// Throws DegenerateInputError when a is not numerically positive definite.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Q factor of a thin QR decomposition (rows >= cols), with R's diagonal
/// made positive. For a square Gaussian input the result is a random
/// orthogonal matrix.
Matrix orthonormal_qr(const Matrix& m);

}  // namespace lorafair
