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

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

#include "lorafair/matrix.hpp"

namespace lorafair {

/// Root of every random stream in the simulator.
struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Child seed for a named sub-stream, e.g. derive_seed(root, "local", {round, client}).
/// Streams with different tags or indices are statistically independent.
RngSeed derive_seed(RngSeed root, std::string_view tag,
                    std::initializer_list<std::uint64_t> indices = {});

/// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngSeed seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal via Box-Muller (both variates are used).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// rows x cols matrix with i.i.d. N(0, std^2) entries, fully determined by seed.
Matrix gaussian_fill(std::size_t rows, std::size_t cols, double std_dev, RngSeed seed);

}  // namespace lorafair
