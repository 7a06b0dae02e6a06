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

#include "lorafair/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lorafair/errors.hpp"
#include "lorafair/kernels.hpp"

namespace lorafair {
namespace {

// Rotates rows p and q of m by (c, s): row_p <- c*row_p - s*row_q,
// row_q <- s*row_p + c*row_q.
void rotate_rows(Matrix& m, std::size_t p, std::size_t q, double c, double s) {
  auto rp = m.row(p);
  auto rq = m.row(q);
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const double a = rp[i];
    const double b = rq[i];
    rp[i] = c * a - s * b;
    rq[i] = s * a + c * b;
  }
}

// Gram-Schmidt of candidate against the first `count` rows of basis (twice,
// for numerical orthogonality). Returns the norm left after projection.
double orthogonalize_against(std::span<double> candidate, const Matrix& basis, std::size_t count) {
  const auto& k = kernels::active();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < count; ++j) {
      const double proj = k.dot(basis.row(j).data(), candidate.data(), candidate.size());
      k.axpy(-proj, basis.row(j).data(), candidate.data(), candidate.size());
    }
  }
  return std::sqrt(k.sum_squares(candidate.data(), candidate.size()));
}

}  // namespace

SvdResult truncated_svd(const Matrix& m, std::size_t k, const SvdOptions& options) {
  const std::size_t min_side = std::min(m.rows(), m.cols());
  if (m.empty() || k == 0 || k > min_side) {
    throw DimensionError("truncated_svd: k=" + std::to_string(k) + " out of range [1, " +
                         std::to_string(min_side) + "] for " + m.shape_string());
  }
  if (m.rows() > kMaxSvdSide || m.cols() > kMaxSvdSide) {
    throw DimensionError("truncated_svd: " + m.shape_string() + " exceeds the 1024 side limit");
  }

  // Work on the tall orientation; rows of `w` are the columns being
  // orthogonalized, which keeps every inner loop contiguous.
  const bool flipped = m.rows() < m.cols();
  Matrix w = flipped ? m : transpose(m);  // n x len
  const std::size_t n = w.rows();
  Matrix vt = Matrix::identity(n);
  const auto& kern = kernels::active();

  int sweeps = 0;
  double worst = 0.0;
  bool converged = n < 2;
  while (!converged && sweeps < options.max_sweeps) {
    ++sweeps;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = kern.sum_squares(w.row(p).data(), w.cols());
        const double beta = kern.sum_squares(w.row(q).data(), w.cols());
        const double gamma = kern.dot(w.row(p).data(), w.row(q).data(), w.cols());
        if (alpha == 0.0 || beta == 0.0 || gamma == 0.0) continue;
        const double ratio = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, ratio);
        if (ratio <= options.tolerance) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_rows(w, p, q, c, s);
        rotate_rows(vt, p, q, c, s);
      }
    }
    converged = worst <= options.tolerance;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "truncated_svd: no convergence after " << sweeps
        << " sweeps on " << m.shape_string() << ", residual off-diagonal ratio " << worst;
    throw ConvergenceError(msg.str());
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(kern.sum_squares(w.row(j).data(), w.cols()));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  // Left vectors live in rows of `left` until the final transpose.
  const std::size_t len = w.cols();
  Matrix left(k, len);
  Matrix right(k, n);
  SvdResult out;
  out.s.resize(k);
  const double cutoff = (sigma[order[0]] > 0.0 ? sigma[order[0]] : 1.0) * 1e-13;
  std::size_t next_basis = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = order[j];
    out.s[j] = sigma[src];
    std::copy(vt.row(src).begin(), vt.row(src).end(), right.row(j).begin());
    auto dst = left.row(j);
    if (sigma[src] > cutoff) {
      kern.scale(1.0 / sigma[src], w.row(src).data(), dst.data(), len);
      orthogonalize_against(dst, left, j);
      const double nrm = std::sqrt(kern.sum_squares(dst.data(), len));
      kern.scale(1.0 / nrm, dst.data(), dst.data(), len);
    } else {
      // Null direction: complete the basis with the next usable unit vector.
      out.s[j] = sigma[src] > 0.0 ? sigma[src] : 0.0;
      while (true) {
        if (next_basis >= len) {
          throw ConvergenceError("truncated_svd: could not complete orthonormal basis");
        }
        std::fill(dst.begin(), dst.end(), 0.0);
        dst[next_basis++] = 1.0;
        const double nrm = orthogonalize_against(dst, left, j);
        if (nrm > 1e-6) {
          kern.scale(1.0 / nrm, dst.data(), dst.data(), len);
          break;
        }
      }
    }
  }

  if (flipped) {
    // m^T = (w^T) had the Jacobi applied; m = V S U^T with roles swapped.
    out.u = transpose(right);
    out.v = transpose(left);
  } else {
    out.u = transpose(left);
    out.v = transpose(right);
  }
  out.sweeps = sweeps;
  return out;
}

Matrix reconstruct(const SvdResult& svd) {
  Matrix us = svd.u;
  for (std::size_t i = 0; i < us.rows(); ++i) {
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= svd.s[j];
  }
  return matmul_nt(us, svd.v);
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw DimensionError("solve_spd: expected square a and matching b, got " + a.shape_string() +
                         " and " + b.shape_string());
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t p = 0; p < j; ++p) diag -= l(j, p) * l(j, p);
    if (!(diag > max_diag * 1e-14)) {
      throw DegenerateInputError("solve_spd: matrix is not positive definite (pivot " +
                                 std::to_string(j) + ")");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t p = 0; p < j; ++p) v -= l(i, p) * l(j, p);
      l(i, j) = v / l(j, j);
    }
  }
  Matrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t p = 0; p < i; ++p) v -= l(i, p) * x(p, c);
      x(i, c) = v / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t p = ii + 1; p < n; ++p) v -= l(p, ii) * x(p, c);
      x(ii, c) = v / l(ii, ii);
    }
  }
  return x;
}

Matrix orthonormal_qr(const Matrix& m) {
  if (m.rows() < m.cols()) {
    throw DimensionError("orthonormal_qr: need rows >= cols, got " + m.shape_string());
  }
  // Columns of q are rows of qt.
  Matrix qt = transpose(m);
  const auto& kern = kernels::active();
  for (std::size_t j = 0; j < qt.rows(); ++j) {
    auto col = qt.row(j);
    const double nrm = orthogonalize_against(col, qt, j);
    if (nrm < 1e-12) throw DegenerateInputError("orthonormal_qr: input is rank deficient");
    kern.scale(1.0 / nrm, col.data(), col.data(), col.size());
  }
  return transpose(qt);
}

}  // namespace lorafair
