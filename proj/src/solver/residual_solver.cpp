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

#include "lorafair/residual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lorafair/errors.hpp"
#include "lorafair/linalg.hpp"

namespace lorafair {
namespace {

constexpr int kMaxHalvings = 60;
constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e12;

void check_shapes(const Matrix& delta_b, const Matrix& dw, const Matrix& a_bar,
                  const Matrix& b_bar) {
  if (b_bar.cols() != a_bar.rows() || dw.rows() != b_bar.rows() || dw.cols() != a_bar.cols() ||
      delta_b.rows() != b_bar.rows() || delta_b.cols() != b_bar.cols()) {
    throw DimensionError("residual objective: incompatible shapes dW " + dw.shape_string() +
                         ", A_bar " + a_bar.shape_string() + ", B_bar " + b_bar.shape_string() +
                         ", delta " + delta_b.shape_string());
  }
}

double regularizer(const Matrix& delta, double lambda, RegularizerNorm norm) {
  const double n = frobenius_norm(delta);
  return norm == RegularizerNorm::kFrobenius ? lambda * n : lambda * n * n;
}

Matrix regularizer_gradient(const Matrix& delta, double lambda, double eps, RegularizerNorm norm) {
  if (norm == RegularizerNorm::kFrobeniusSquared) return scale(delta, 2.0 * lambda);
  return scale(delta, lambda / std::max(frobenius_norm(delta), eps));
}

// Objective in Gram form. With B' = B_bar + delta, C = dW A^T and
// G = A A^T (r x r):  <B'A, dW> = <B', C>,  |B'A|^2 = <B'G, B'>.
// Each evaluation costs O(d r^2) instead of O(d r l).
class ResidualProblem {
 public:
  ResidualProblem(const Matrix& dw, const Matrix& a_bar, const Matrix& b_bar,
                  const SolverConfig& cfg)
      : b_bar_(b_bar),
        c_(matmul_nt(dw, a_bar)),
        gram_(matmul_nt(a_bar, a_bar)),
        dw_norm_(frobenius_norm(dw)),
        cfg_(cfg) {}

  struct Terms {
    double inner = 0.0;     // <B', C>
    double m_norm = 0.0;    // |B' A|
    Matrix b_prime;
    Matrix b_prime_gram;    // B' G
  };

  Terms terms(const Matrix& delta) const {
    Terms t;
    t.b_prime = add(b_bar_, delta);
    t.b_prime_gram = matmul(t.b_prime, gram_);
    t.inner = frobenius_inner(t.b_prime, c_);
    t.m_norm = std::sqrt(std::max(0.0, frobenius_inner(t.b_prime_gram, t.b_prime)));
    return t;
  }

  double cosine(const Terms& t) const {
    if (t.m_norm < kCosineNormFloor) return std::numeric_limits<double>::quiet_NaN();
    return t.inner / (t.m_norm * dw_norm_);
  }

  /// NaN when the realized update degenerates to zero.
  double loss(const Matrix& delta) const {
    return 1.0 - cosine(terms(delta)) + regularizer(delta, cfg_.lambda, cfg_.norm);
  }

  Matrix grad(const Matrix& delta) const {
    const Terms t = terms(delta);
    const double denom = t.m_norm * dw_norm_;
    // d cos / dB' = C / (|M||v|) - (<M,v> / (|M|^3 |v|)) B'G
    Matrix g = scale(c_, -1.0 / denom);
    accumulate(g, t.inner / (t.m_norm * t.m_norm * denom), t.b_prime_gram);
    accumulate(g, 1.0, regularizer_gradient(delta, cfg_.lambda, cfg_.norm_guard_eps, cfg_.norm));
    return g;
  }

  double cosine_at(const Matrix& delta) const { return cosine(terms(delta)); }

 private:
  const Matrix& b_bar_;
  Matrix c_;
  Matrix gram_;
  double dw_norm_;
  SolverConfig cfg_;
};

double similarity_or_identity(const Matrix& base, const Matrix& moved) {
  const bool base_zero = frobenius_norm(base) < kCosineNormFloor;
  const bool moved_zero = frobenius_norm(moved) < kCosineNormFloor;
  if (base_zero || moved_zero) return base_zero && moved_zero ? 1.0 : 0.0;
  return cosine_similarity_flat(base, moved);
}

SolverReport solve_on_b(const Matrix& dw, const Matrix& a_bar, const Matrix& b_bar,
                        const SolverConfig& cfg) {
  check_shapes(b_bar, dw, a_bar, b_bar);
  if (frobenius_norm(dw) < cfg.norm_guard_eps) {
    throw DegenerateInputError("residual solve: |dW|_F below norm guard");
  }
  const ResidualProblem problem(dw, a_bar, b_bar, cfg);

  SolverReport report;
  Matrix delta = Matrix::zeros(b_bar.rows(), b_bar.cols());
  double current = problem.loss(delta);
  if (!std::isfinite(current)) {
    throw SolverDivergedError("residual solve: non-finite loss at the starting point");
  }
  report.initial_loss = current;
  report.initial_cosine = problem.cosine_at(delta);
  report.loss_trace.push_back(current);

  // Barzilai-Borwein trial steps with halving until the loss strictly drops,
  // so every accepted step is a descent step.
  double step = cfg.learning_rate;
  Matrix g = problem.grad(delta);
  for (int it = 0; it < cfg.max_steps; ++it) {
    if (!all_finite(g)) throw SolverDivergedError("residual solve: non-finite gradient");
    if (frobenius_norm(g) < cfg.grad_tol) {
      report.converged = true;
      break;
    }
    bool accepted = false;
    Matrix candidate;
    double candidate_loss = current;
    for (int h = 0; h < kMaxHalvings; ++h) {
      candidate = add_scaled(delta, -step, g);
      candidate_loss = problem.loss(candidate);
      if (std::isfinite(candidate_loss) && candidate_loss < current) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Matrix g_next = problem.grad(candidate);
    const Matrix s_k = subtract(candidate, delta);
    const Matrix y_k = subtract(g_next, g);
    const double sy = frobenius_inner(s_k, y_k);
    // Fall back to growing the last step where the curvature estimate is unusable.
    step = sy > 0.0 ? std::clamp(frobenius_inner(s_k, s_k) / sy, kMinStep, kMaxStep)
                    : std::min(2.0 * step, kMaxStep);
    delta = std::move(candidate);
    g = std::move(g_next);
    current = candidate_loss;
    report.loss_trace.push_back(current);
    ++report.steps_taken;
  }

  report.final_loss = current;
  report.final_cosine = problem.cosine_at(delta);
  report.final_delta_norm = frobenius_norm(delta);
  report.regularizer_similarity = similarity_or_identity(b_bar, add(b_bar, delta));
  report.delta = std::move(delta);
  return report;
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("solver: lambda must be >= 0");
  if (cfg.max_steps < 1) throw std::invalid_argument("solver: max_steps must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("solver: learning_rate must be > 0");
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("solver: grad_tol must be > 0");
  if (!(cfg.norm_guard_eps > 0.0)) throw std::invalid_argument("solver: norm_guard_eps must be > 0");
}

double objective(const Matrix& delta_b, const Matrix& dw, const Matrix& a_bar,
                 const Matrix& b_bar, double lambda, RegularizerNorm norm) {
  check_shapes(delta_b, dw, a_bar, b_bar);
  const Matrix realized = matmul(add(b_bar, delta_b), a_bar);
  return 1.0 - cosine_similarity_flat(dw, realized) + regularizer(delta_b, lambda, norm);
}

Matrix gradient(const Matrix& delta_b, const Matrix& dw, const Matrix& a_bar,
                const Matrix& b_bar, double lambda, double norm_guard_eps,
                RegularizerNorm norm) {
  check_shapes(delta_b, dw, a_bar, b_bar);
  const Matrix u = matmul(add(b_bar, delta_b), a_bar);
  const double un = frobenius_norm(u);
  const double vn = frobenius_norm(dw);
  if (un < kCosineNormFloor || vn < kCosineNormFloor) {
    throw DegenerateInputError("residual gradient: degenerate norm (|M|=" + std::to_string(un) +
                               ", |dW|=" + std::to_string(vn) + ")");
  }
  const double uv = frobenius_inner(u, dw);
  // d(cos)/dM, then chain through M = B' A_bar.
  Matrix dcos_dm = scale(dw, 1.0 / (un * vn));
  accumulate(dcos_dm, -uv / (un * un * un * vn), u);
  Matrix g = scale(matmul_nt(dcos_dm, a_bar), -1.0);
  accumulate(g, 1.0, regularizer_gradient(delta_b, lambda, norm_guard_eps, norm));
  return g;
}

SolverReport solve(const Matrix& dw, const Matrix& a_bar, const Matrix& b_bar,
                   const SolverConfig& cfg) {
  validate(cfg);
  if (cfg.residual_position == ResidualPosition::kOnB) return solve_on_b(dw, a_bar, b_bar, cfg);
  // (B_bar (A_bar + dA))^T = (A_bar^T + dA^T) B_bar^T: the on-B problem in transpose.
  SolverReport report = solve_on_b(transpose(dw), transpose(b_bar), transpose(a_bar), cfg);
  report.delta = transpose(report.delta);
  return report;
}

ProjectionOptimum projection_oracle(const Matrix& dw, const Matrix& a_bar) {
  if (dw.cols() != a_bar.cols()) {
    throw DimensionError("projection_oracle: dW " + dw.shape_string() + " vs A_bar " +
                         a_bar.shape_string());
  }
  const SvdResult svd = truncated_svd(a_bar, std::min(a_bar.rows(), a_bar.cols()));
  if (a_bar.rows() > a_bar.cols() || svd.s.back() <= 1e-8) {
    throw DegenerateInputError("projection_oracle: A_bar is not of full row rank");
  }
  const double dw_norm = frobenius_norm(dw);
  if (dw_norm < kCosineNormFloor) throw DegenerateInputError("projection_oracle: |dW| is zero");
  // X* = dW A^T (A A^T)^-1  <=>  (A A^T) X*^T = A dW^T
  const Matrix gram = matmul_nt(a_bar, a_bar);
  const Matrix x_star = transpose(solve_spd(gram, matmul_nt(a_bar, dw)));
  ProjectionOptimum out;
  out.cos_star = frobenius_norm(matmul(x_star, a_bar)) / dw_norm;
  out.x_star = x_star;
  return out;
}

}  // namespace lorafair
