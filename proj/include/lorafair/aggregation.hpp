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

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lorafair/lora.hpp"
#include "lorafair/matrix.hpp"
#include "lorafair/residual_solver.hpp"

namespace lorafair {

/// Server aggregation strategy.
enum class Method {
  kFedIt,           ///< average A and B separately
  kFfaLora,         ///< A frozen at init, only B trained and averaged
  kFlora,           ///< stack all client modules, fold into the base, reinit
  kFlexLora,        ///< SVD of the weighted sum of products
  kHetLora,         ///< zero-pad to the largest rank, average, truncate per client
  kLoraFair,        ///< average, then server-side residual on B (or A)
  kLoraFairHetLora  ///< zero-pad, then LoRA-FAIR at the padded rank
};

std::string_view method_name(Method m) noexcept;
/// Inverse of method_name; throws UnsupportedMethodError on an unknown name.
Method parse_method(std::string_view name);
std::span<const Method> all_methods() noexcept;
/// Methods that accept clients with different ranks.
bool supports_heterogeneous_ranks(Method m) noexcept;

struct ClientContribution {
  LoraPair pair;
  std::int64_t sample_count = 1;
  int client_id = 0;
};

struct AggregateResult {
  Method method = Method::kFedIt;
  Matrix broadcast_a;
  Matrix broadcast_b;
  Matrix ideal_update;     ///< sum_k p_k B_k A_k
  Matrix realized_update;  ///< what clients end up with (product or folded delta)
  double bias_cosine = 1.0;
  double bias_frobenius = 0.0;
  std::int64_t downlink_floats = 0;  ///< per client
  std::optional<Matrix> fold_delta;  ///< FLoRA only
  bool reinit_required = false;      ///< true iff FLoRA
  std::optional<SolverReport> solver;
};

/// p_k = n_k / sum n. Throws DimensionError on an empty list and
/// std::invalid_argument on a non-positive sample count.
std::vector<double> weights(std::span<const ClientContribution> contribs);

struct AveragedPair {
  Matrix a_bar;
  Matrix b_bar;
};

/// A_bar = sum p_k A_k and B_bar = sum p_k B_k; every pair must share shapes.
AveragedPair average_pairs(std::span<const ClientContribution> contribs);

/// B_bar * A_bar: the update FedIT clients actually receive.
Matrix approx_update(const Matrix& a_bar, const Matrix& b_bar);

/// sum p_k B_k A_k. Ranks may differ; (d, l) must agree.
Matrix ideal_update(std::span<const ClientContribution> contribs);

/// Cosine between ideal and realized update with zero-update conventions:
/// both zero -> 1, exactly one zero -> 0.
double update_cosine(const Matrix& ideal, const Matrix& realized);

AggregateResult aggregate_fedit(std::span<const ClientContribution> contribs);

/// Throws ProtocolViolation if any client's A differs bit-wise from frozen_a.
AggregateResult aggregate_ffa(std::span<const ClientContribution> contribs, const Matrix& frozen_a);

AggregateResult aggregate_flora(std::span<const ClientContribution> contribs);

AggregateResult aggregate_flexlora(std::span<const ClientContribution> contribs,
                                   std::size_t target_rank);

/// Zero-pads every pair to r_max (B on the right, A at the bottom).
std::vector<ClientContribution> hetlora_pad(std::span<const ClientContribution> contribs,
                                            std::size_t r_max);

/// Leading r_k columns of B and rows of A.
LoraPair hetlora_truncate(const LoraPair& pair, std::size_t r_k);

/// Pad to the largest rank, then plain weighted averaging.
AggregateResult aggregate_hetlora(std::span<const ClientContribution> contribs);

/// FedIT averaging followed by the residual solve. A solver budget of
/// max_steps == 0 skips the solve and reproduces FedIT.
AggregateResult aggregate_lorafair(std::span<const ClientContribution> contribs,
                                   const SolverConfig& solver_cfg);

/// hetlora_pad to the largest rank, then aggregate_lorafair.
AggregateResult aggregate_lorafair_hetlora(std::span<const ClientContribution> contribs,
                                           const SolverConfig& solver_cfg);

struct CommCost {
  std::int64_t uplink_floats = 0;    ///< total over participating clients
  std::int64_t downlink_floats = 0;  ///< per participating client
};

/// Floats moved in one round by `method` for clients with the given ranks.
/// Homogeneous methods broadcast at ranks.front(); heterogeneous ones report
/// the largest per-client payload.
CommCost comm_cost(Method method, std::size_t d, std::size_t l, std::span<const std::size_t> ranks);

}  // namespace lorafair
