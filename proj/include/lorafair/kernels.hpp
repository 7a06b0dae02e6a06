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
#include <string_view>

// Inner-loop kernels over contiguous double arrays. Every kernel has a
// portable scalar reference and, on x86-64, an AVX2+FMA variant compiled with
// function-level target attributes. The active variant is chosen once at
// startup from CPUID and can be pinned through LORAFAIR_SIMD=scalar|avx2 or
// set_active_isa().

namespace lorafair::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  /// y[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* y, std::size_t n);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void scale(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define LORAFAIR_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
void scale(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#else
#define LORAFAIR_HAVE_AVX2_KERNELS 0
#endif

/// True when the running CPU can execute the given variant.
bool cpu_supports(Isa isa) noexcept;

/// Best variant for this CPU, honouring the LORAFAIR_SIMD override.
Isa detect_isa();

/// Table for a specific variant; throws std::invalid_argument if the CPU
/// cannot run it.
const KernelTable& table_for(Isa isa);

/// Table currently used by matrix operations.
const KernelTable& active();

Isa active_isa() noexcept;
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;

}  // namespace lorafair::kernels
