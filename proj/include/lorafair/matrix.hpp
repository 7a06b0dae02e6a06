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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lorafair {

/// Dense row-major matrix of doubles.
///
/// A default-constructed Matrix is the empty 0x0 placeholder; every other
/// constructor requires positive dimensions. Operations never produce NaN or
/// Inf from finite inputs except through overflow.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  /// "RxC", used in error messages.
  std::string shape_string() const;

  /// Bit-exact equality of shape and every entry.
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double alpha);
/// a + alpha * b
Matrix add_scaled(const Matrix& a, double alpha, const Matrix& b);
/// acc += alpha * m, in place.
void accumulate(Matrix& acc, double alpha, const Matrix& m);

/// Flattened inner product <a, b>.
double frobenius_inner(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Below this Frobenius norm a matrix counts as zero for cosine purposes.
inline constexpr double kCosineNormFloor = 1e-12;

/// <a, b> / (|a|_F |b|_F), clamped to [-1, 1]. Throws DimensionError on
/// shape mismatch and DegenerateInputError when either norm is below
/// kCosineNormFloor.
double cosine_similarity_flat(const Matrix& a, const Matrix& b);

/// Matrices side by side; all must share a row count.
Matrix hstack(std::span<const Matrix> blocks);
/// Matrices on top of each other; all must share a column count.
Matrix vstack(std::span<const Matrix> blocks);

/// Zero-extend to target_rows x target_cols (existing entries keep their
/// positions in the top-left corner).
Matrix pad_zero(const Matrix& m, std::size_t target_rows, std::size_t target_cols);
Matrix slice_rows(const Matrix& m, std::size_t first, std::size_t count);
Matrix slice_cols(const Matrix& m, std::size_t first, std::size_t count);

bool all_finite(const Matrix& m) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace lorafair
