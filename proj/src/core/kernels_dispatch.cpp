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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "lorafair/kernels.hpp"

namespace lorafair::kernels {
namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, &scalar::dot, &scalar::axpy,
                                   &scalar::sum_squares, &scalar::scale};
#if LORAFAIR_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{Isa::kAvx2, &avx2::dot, &avx2::axpy,
                                 &avx2::sum_squares, &avx2::scale};
#endif

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table_for(detect_isa())};
  return slot;
}

}  // namespace

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if LORAFAIR_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (const char* env = std::getenv("LORAFAIR_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
  }
  return cpu_supports(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

const KernelTable& table_for(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument("kernel variant '" + std::string(isa_name(isa)) +
                                "' is not supported on this CPU");
  }
#if LORAFAIR_HAVE_AVX2_KERNELS
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active().isa; }

void set_active_isa(Isa isa) {
  active_slot().store(&table_for(isa), std::memory_order_release);
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace lorafair::kernels
