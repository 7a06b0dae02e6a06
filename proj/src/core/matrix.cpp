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

#include "lorafair/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lorafair/errors.hpp"
#include "lorafair/kernels.hpp"

namespace lorafair {
namespace {

void require_positive(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("matrix dimensions must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  require_positive(rows, cols);
  data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_positive(rows, cols);
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + shape_string());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged row lengths");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + a.shape_string() + " * " +
                         b.shape_string());
  }
  const auto& k = kernels::active();
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* c_row = c.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip != 0.0) k.axpy(aip, b.row(p).data(), c_row, b.cols());
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + a.shape_string() +
                         " * (" + b.shape_string() + ")^T");
  }
  const auto& k = kernels::active();
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dimensions differ, (" + a.shape_string() +
                         ")^T * " + b.shape_string());
  }
  const auto& k = kernels::active();
  Matrix c(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const double* b_row = b.row(p).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double api = a(p, i);
      if (api != 0.0) k.axpy(api, b_row, c.row(i).data(), b.cols());
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) { return add_scaled(a, 1.0, b); }

Matrix subtract(const Matrix& a, const Matrix& b) { return add_scaled(a, -1.0, b); }

Matrix scale(const Matrix& m, double alpha) {
  Matrix out(m.rows(), m.cols());
  kernels::active().scale(alpha, m.data().data(), out.data().data(), m.size());
  return out;
}

Matrix add_scaled(const Matrix& a, double alpha, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  kernels::active().axpy(alpha, b.data().data(), out.data().data(), out.size());
  return out;
}

void accumulate(Matrix& acc, double alpha, const Matrix& m) {
  require_same_shape(acc, m, "accumulate");
  kernels::active().axpy(alpha, m.data().data(), acc.data().data(), acc.size());
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_inner");
  return kernels::active().dot(a.data().data(), b.data().data(), a.size());
}

double frobenius_norm(const Matrix& m) {
  return std::sqrt(kernels::active().sum_squares(m.data().data(), m.size()));
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  return frobenius_norm(subtract(a, b));
}

double cosine_similarity_flat(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "cosine_similarity_flat");
  const double na = frobenius_norm(a);
  const double nb = frobenius_norm(b);
  if (na < kCosineNormFloor || nb < kCosineNormFloor) {
    throw DegenerateInputError("cosine_similarity_flat: norm below 1e-12 (|a|=" +
                               std::to_string(na) + ", |b|=" + std::to_string(nb) + ")");
  }
  return std::clamp(frobenius_inner(a, b) / (na * nb), -1.0, 1.0);
}

Matrix hstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw DimensionError("hstack: no blocks");
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) {
      throw DimensionError("hstack: row count " + std::to_string(b.rows()) + " differs from " +
                           std::to_string(rows));
    }
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy(b.row(i).begin(), b.row(i).end(), out.row(i).begin() + offset);
    }
    offset += b.cols();
  }
  return out;
}

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw DimensionError("vstack: no blocks");
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) {
      throw DimensionError("vstack: column count " + std::to_string(b.cols()) +
                           " differs from " + std::to_string(cols));
    }
    rows += b.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& b : blocks) data.insert(data.end(), b.data().begin(), b.data().end());
  return Matrix(rows, cols, std::move(data));
}

Matrix pad_zero(const Matrix& m, std::size_t target_rows, std::size_t target_cols) {
  if (target_rows < m.rows() || target_cols < m.cols()) {
    throw DimensionError("pad_zero: target " + std::to_string(target_rows) + "x" +
                         std::to_string(target_cols) + " smaller than " + m.shape_string());
  }
  Matrix out(target_rows, target_cols);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::copy(m.row(i).begin(), m.row(i).end(), out.row(i).begin());
  }
  return out;
}

Matrix slice_rows(const Matrix& m, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > m.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " +
                         m.shape_string());
  }
  auto begin = m.data().begin() + static_cast<std::ptrdiff_t>(first * m.cols());
  return Matrix(count, m.cols(),
                std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * m.cols())));
}

Matrix slice_cols(const Matrix& m, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > m.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " +
                         m.shape_string());
  }
  Matrix out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i).subspan(first, count);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace lorafair
