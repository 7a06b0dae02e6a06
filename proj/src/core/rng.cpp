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

#include "lorafair/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lorafair {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngSeed derive_seed(RngSeed root, std::string_view tag,
                    std::initializer_list<std::uint64_t> indices) {
  // FNV-1a over the tag, then mix in root and indices through splitmix64.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  std::uint64_t state = root.value ^ h;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t idx : indices) {
    state ^= idx + 0x632BE59BD9B4E019ull;
    out ^= splitmix64(state);
  }
  return RngSeed{out};
}

Rng::Rng(RngSeed seed) {
  std::uint64_t state = seed.value;
  for (auto& word : s_) word = splitmix64(state);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and rescale by U^(1/shape).
    const double g = gamma(shape + 1.0);
    double u = 0.0;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Matrix gaussian_fill(std::size_t rows, std::size_t cols, double std_dev, RngSeed seed) {
  if (!(std_dev > 0.0)) throw std::invalid_argument("gaussian_fill: std must be positive");
  Matrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data()) v = std_dev * rng.normal();
  return m;
}

}  // namespace lorafair
