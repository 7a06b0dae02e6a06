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

#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "lorafair/errors.hpp"
#include "lorafair/linalg.hpp"
#include "lorafair/matrix.hpp"
#include "lorafair/rng.hpp"
#include "oracles.hpp"

using namespace lorafair;

TEST_CASE("constructor rejects zero dimensions and wrong data length") {
  CHECK_THROWS_AS(Matrix(0, 3), DimensionError);
  CHECK_THROWS_AS(Matrix(2, 0), DimensionError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>(3, 1.0)), DimensionError);
  const Matrix m(2, 3);
  CHECK(m.size() == 6);
  CHECK(std::all_of(m.data().begin(), m.data().end(), [](double v) { return v == 0.0; }));
  CHECK(Matrix().empty());
}

TEST_CASE("from_rows rejects ragged input") {
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionError);
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
}

TEST_CASE("matmul by identity returns the operand") {
  const Matrix m = Matrix::from_rows({{1.5, -2}, {0.25, 7}});
  CHECK(matmul(Matrix::identity(2), m) == m);
  CHECK(matmul(m, Matrix::identity(2)) == m);
}

TEST_CASE("matmul hand-computed product") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5}, {6}});
  CHECK(matmul(a, b) == Matrix::from_rows({{17}, {39}}));
}

TEST_CASE("matmul matches the triple-loop oracle") {
  oracle::Source src(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = src.matrix(8, 2);
    const Matrix b = src.matrix(2, 8);
    CHECK(max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)) <= 1e-12);
  }
  const Matrix a = src.matrix(13, 7);
  const Matrix b = src.matrix(7, 9);
  CHECK(max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)) <= 1e-12);
  CHECK(max_abs_diff(matmul_nt(a, transpose(b)), oracle::naive_matmul(a, b)) <= 1e-12);
  CHECK(max_abs_diff(matmul_tn(transpose(a), b), oracle::naive_matmul(a, b)) <= 1e-12);
}

TEST_CASE("matmul dimension mismatch names both shapes") {
  const Matrix a(2, 3);
  const Matrix b(2, 3);
  try {
    (void)matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("2x3") != std::string::npos);
    CHECK(std::count(what.begin(), what.end(), 'x') >= 2);
  }
  CHECK_THROWS_AS((void)matmul_nt(Matrix(2, 3), Matrix(2, 4)), DimensionError);
  CHECK_THROWS_AS((void)matmul_tn(Matrix(2, 3), Matrix(3, 4)), DimensionError);
}

TEST_CASE("matmul is associative on random triples") {
  oracle::Source src(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = src.matrix(5, 4);
    const Matrix b = src.matrix(4, 6);
    const Matrix c = src.matrix(6, 3);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    CHECK(oracle::relative_error(left, right) <= 1e-10);
  }
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(Matrix::zeros(3, 4)) == 0.0);
  CHECK(frobenius_norm(Matrix::from_rows({{3, 4}})) == doctest::Approx(5.0).epsilon(1e-15));
  oracle::Source src(13);
  const Matrix m = src.matrix(5, 5);
  CHECK(std::abs(frobenius_norm(m) - oracle::naive_norm(m)) <= 1e-12);
  const Matrix n = src.matrix(5, 5);
  CHECK(std::abs(frobenius_distance(m, n) - oracle::naive_distance(m, n)) <= 1e-12);
}

TEST_CASE("cosine similarity special values") {
  oracle::Source src(14);
  const Matrix m = src.matrix(4, 3);
  CHECK(cosine_similarity_flat(m, m) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity_flat(m, scale(m, -1.0)) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cosine_similarity_flat(m, scale(m, 2.0)) == doctest::Approx(1.0).epsilon(1e-15));
  for (double c : {1e-6, 0.3, 17.0, 1e6}) {
    CHECK(std::abs(cosine_similarity_flat(m, scale(m, c)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("cosine similarity rejects degenerate and mismatched input") {
  const Matrix m = Matrix::from_rows({{1, 2}});
  CHECK_THROWS_AS((void)cosine_similarity_flat(m, Matrix::zeros(1, 2)), DegenerateInputError);
  CHECK_THROWS_AS((void)cosine_similarity_flat(Matrix::from_rows({{1e-13, 0}}), m),
                  DegenerateInputError);
  CHECK_THROWS_AS((void)cosine_similarity_flat(m, Matrix::from_rows({{1}, {2}})), DimensionError);
}

TEST_CASE("cosine similarity stays in [-1, 1]") {
  oracle::Source src(15);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = cosine_similarity_flat(src.matrix(3, 3), src.matrix(3, 3));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("elementwise operations") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{0.5, -1}, {2, 0}});
  CHECK(add(a, b) == Matrix::from_rows({{1.5, 1}, {5, 4}}));
  CHECK(subtract(a, b) == Matrix::from_rows({{0.5, 3}, {1, 4}}));
  CHECK(scale(a, 2.0) == Matrix::from_rows({{2, 4}, {6, 8}}));
  CHECK(add_scaled(a, -2.0, b) == Matrix::from_rows({{0, 4}, {-1, 4}}));
  Matrix acc = a;
  accumulate(acc, 1.0, b);
  CHECK(acc == add(a, b));
  CHECK(transpose(Matrix::from_rows({{1, 2, 3}})) == Matrix::from_rows({{1}, {2}, {3}}));
  CHECK(frobenius_inner(a, b) == doctest::Approx(0.5 - 2 + 6));
  CHECK_THROWS_AS((void)add(a, Matrix(2, 3)), DimensionError);
}

TEST_CASE("hstack, vstack, pad and slice") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5}, {6}});
  const std::vector<Matrix> hs{a, b};
  CHECK(hstack(hs) == Matrix::from_rows({{1, 2, 5}, {3, 4, 6}}));
  const std::vector<Matrix> vs{a, transpose(b)};
  CHECK(vstack(vs) == Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  const std::vector<Matrix> bad{a, Matrix(3, 1)};
  CHECK_THROWS_AS((void)hstack(bad), DimensionError);

  const Matrix padded = pad_zero(a, 3, 4);
  CHECK(padded.rows() == 3);
  CHECK(padded.cols() == 4);
  CHECK(padded(1, 1) == 4.0);
  CHECK(padded(2, 3) == 0.0);
  CHECK(slice_cols(slice_rows(padded, 0, 2), 0, 2) == a);
  CHECK_THROWS_AS((void)pad_zero(a, 1, 2), DimensionError);
  CHECK_THROWS_AS((void)slice_rows(a, 1, 2), DimensionError);
}

TEST_CASE("pad then slice back is the identity on random matrices") {
  oracle::Source src(16);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t r = 1 + src.index(5);
    const std::size_t c = 1 + src.index(5);
    const Matrix m = src.matrix(r, c);
    const Matrix p = pad_zero(m, r + src.index(4), c + src.index(4));
    CHECK(slice_cols(slice_rows(p, 0, r), 0, c) == m);
  }
}

TEST_CASE("all_finite flags NaN and Inf") {
  Matrix m = Matrix::from_rows({{1, 2}});
  CHECK(all_finite(m));
  m(0, 1) = std::nan("");
  CHECK_FALSE(all_finite(m));
  m(0, 1) = INFINITY;
  CHECK_FALSE(all_finite(m));
}

TEST_CASE("truncated svd of a diagonal matrix") {
  const std::vector<double> d{3, 2, 1};
  const Matrix m = Matrix::diagonal(d);
  const SvdResult svd = truncated_svd(m, 2);
  REQUIRE(svd.s.size() == 2);
  CHECK(svd.s[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(svd.s[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(frobenius_distance(reconstruct(svd), m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncated svd recovers an exact rank-1 matrix") {
  oracle::Source src(17);
  const Matrix u = src.matrix(6, 1);
  const Matrix v = src.matrix(1, 5);
  const Matrix m = matmul(u, v);
  CHECK(frobenius_distance(reconstruct(truncated_svd(m, 1)), m) <= 1e-10);
}

TEST_CASE("truncated svd error matches the full decomposition tail") {
  oracle::Source src(18);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = src.matrix(12, 9);
    const SvdResult svd = truncated_svd(m, 4);
    const double err = frobenius_distance(reconstruct(svd), m);
    CHECK(std::abs(err - oracle::tail_norm(m, 4)) <= 1e-8);
    const auto full = oracle::singular_values(m);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(svd.s[i] - full[i]) <= 1e-9);
    CHECK(max_abs_diff(reconstruct(svd), oracle::best_rank_k(m, 4)) <= 1e-8);
  }
}

TEST_CASE("truncated svd factors are orthonormal and values descend") {
  oracle::Source src(19);
  for (auto [r, c, k] : {std::tuple{12, 9, 4}, std::tuple{5, 11, 5}, std::tuple{7, 7, 7},
                         std::tuple{30, 20, 3}}) {
    const Matrix m = src.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    const SvdResult svd = truncated_svd(m, static_cast<std::size_t>(k));
    const Matrix eye = Matrix::identity(static_cast<std::size_t>(k));
    CHECK(frobenius_distance(matmul_tn(svd.u, svd.u), eye) <= 1e-8);
    CHECK(frobenius_distance(matmul_tn(svd.v, svd.v), eye) <= 1e-8);
    for (std::size_t i = 1; i < svd.s.size(); ++i) CHECK(svd.s[i - 1] >= svd.s[i]);
    for (double s : svd.s) CHECK(s >= 0.0);
  }
}

TEST_CASE("truncated svd of a rank-deficient matrix completes the basis") {
  oracle::Source src(20);
  const Matrix m = matmul(src.matrix(8, 2), src.matrix(2, 6));
  const SvdResult svd = truncated_svd(m, 4);
  CHECK(svd.s[2] <= 1e-10);
  CHECK(svd.s[3] <= 1e-10);
  CHECK(frobenius_distance(matmul_tn(svd.u, svd.u), Matrix::identity(4)) <= 1e-8);
  CHECK(frobenius_distance(reconstruct(svd), m) <= 1e-10);
  const SvdResult zero = truncated_svd(Matrix::zeros(4, 3), 2);
  CHECK(zero.s[0] == 0.0);
  CHECK(frobenius_distance(matmul_tn(zero.u, zero.u), Matrix::identity(2)) <= 1e-8);
}

TEST_CASE("truncated svd argument checks") {
  const Matrix m(4, 3);
  CHECK_THROWS_AS((void)truncated_svd(m, 0), DimensionError);
  CHECK_THROWS_AS((void)truncated_svd(m, 4), DimensionError);
  CHECK_THROWS_AS((void)truncated_svd(Matrix(kMaxSvdSide + 1, 2), 1), DimensionError);
  oracle::Source src(21);
  SvdOptions strict;
  strict.max_sweeps = 1;
  strict.tolerance = 1e-300;
  CHECK_THROWS_AS((void)truncated_svd(src.matrix(10, 10), 3, strict), ConvergenceError);
}

TEST_CASE("solve_spd solves and rejects indefinite systems") {
  oracle::Source src(22);
  const Matrix g = src.matrix(5, 5);
  const Matrix a = add(matmul_tn(g, g), Matrix::identity(5));
  const Matrix b = src.matrix(5, 3);
  const Matrix x = solve_spd(a, b);
  CHECK(max_abs_diff(oracle::naive_matmul(a, x), b) <= 1e-10);
  CHECK_THROWS_AS((void)solve_spd(Matrix::from_rows({{1, 2}, {2, 1}}), Matrix(2, 1)),
                  DegenerateInputError);
  CHECK_THROWS_AS((void)solve_spd(Matrix(2, 3), Matrix(2, 1)), DimensionError);
}

TEST_CASE("orthonormal_qr yields orthonormal columns spanning the input") {
  oracle::Source src(23);
  const Matrix m = src.matrix(7, 4);
  const Matrix q = orthonormal_qr(m);
  CHECK(frobenius_distance(matmul_tn(q, q), Matrix::identity(4)) <= 1e-12);
  // m lies in span(q): q q^T m == m
  CHECK(max_abs_diff(matmul(q, matmul_tn(q, m)), m) <= 1e-10);
  CHECK_THROWS_AS((void)orthonormal_qr(Matrix(2, 3)), DimensionError);
}

TEST_CASE("gaussian_fill is deterministic per seed") {
  const Matrix a = gaussian_fill(4, 5, 1.0, RngSeed{7});
  const Matrix b = gaussian_fill(4, 5, 1.0, RngSeed{7});
  const Matrix c = gaussian_fill(4, 5, 1.0, RngSeed{8});
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK_THROWS((void)gaussian_fill(2, 2, 0.0, RngSeed{1}));
}

TEST_CASE("gaussian_fill moments at unit scale") {
  const Matrix m = gaussian_fill(1000, 1000, 1.0, RngSeed{2024});
  const double n = static_cast<double>(m.size());
  const double mean = std::accumulate(m.data().begin(), m.data().end(), 0.0) / n;
  double var = 0.0;
  for (double v : m.data()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1));
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(sd - 1.0) < 0.01);
}

TEST_CASE("gaussian_fill at adapter init scale") {
  const Matrix m = gaussian_fill(100, 1000, 0.02, RngSeed{99});
  double ss = 0.0;
  for (double v : m.data()) ss += v * v;
  const double sd = std::sqrt(ss / static_cast<double>(m.size()));
  CHECK(std::abs(sd - 0.02) / 0.02 < 0.05);
}

TEST_CASE("derive_seed separates tags and indices") {
  const RngSeed root{42};
  CHECK(derive_seed(root, "a") == derive_seed(root, "a"));
  CHECK_FALSE(derive_seed(root, "a") == derive_seed(root, "b"));
  CHECK_FALSE(derive_seed(root, "a", {1}) == derive_seed(root, "a", {2}));
  CHECK_FALSE(derive_seed(root, "a", {1, 2}) == derive_seed(root, "a", {2, 1}));
  CHECK_FALSE(derive_seed(RngSeed{1}, "a") == derive_seed(RngSeed{2}, "a"));
}

TEST_CASE("rng streams are reproducible and uniform_index stays in range") {
  Rng a(RngSeed{5});
  Rng b(RngSeed{5});
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng r(RngSeed{6});
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gamma sampler mean matches its shape") {
  Rng r(RngSeed{31});
  for (double shape : {0.3, 1.0, 4.5}) {
    double sum = 0.0;
    constexpr int kN = 200000;
    for (int i = 0; i < kN; ++i) {
      const double g = r.gamma(shape);
      REQUIRE(g >= 0.0);
      sum += g;
    }
    // sd of the mean is sqrt(shape / N)
    CHECK(std::abs(sum / kN - shape) < 5.0 * std::sqrt(shape / kN));
  }
}
