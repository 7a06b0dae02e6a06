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

#include "lorafair/aggregation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lorafair/errors.hpp"
#include "lorafair/linalg.hpp"

namespace lorafair {
namespace {

constexpr std::array kAllMethods{Method::kFedIt,   Method::kFfaLora, Method::kFlora,
                                 Method::kFlexLora, Method::kHetLora, Method::kLoraFair,
                                 Method::kLoraFairHetLora};

void require_nonempty(std::span<const ClientContribution> contribs, const char* op) {
  if (contribs.empty()) throw DimensionError(std::string(op) + ": no client contributions");
}

void require_same_dims(std::span<const ClientContribution> contribs, const char* op) {
  require_nonempty(contribs, op);
  const auto& first = contribs.front().pair;
  for (const auto& c : contribs) {
    if (c.pair.out_dim() != first.out_dim() || c.pair.in_dim() != first.in_dim()) {
      throw DimensionError(std::string(op) + ": client " + std::to_string(c.client_id) +
                           " has update shape " + std::to_string(c.pair.out_dim()) + "x" +
                           std::to_string(c.pair.in_dim()) + ", expected " +
                           std::to_string(first.out_dim()) + "x" +
                           std::to_string(first.in_dim()));
    }
  }
}

void require_same_rank(std::span<const ClientContribution> contribs, Method method) {
  require_same_dims(contribs, "aggregate");
  const std::size_t r = contribs.front().pair.rank();
  for (const auto& c : contribs) {
    if (c.pair.rank() != r) {
      throw UnsupportedMethodError(std::string(method_name(method)) +
                                   " requires homogeneous ranks; client " +
                                   std::to_string(c.client_id) + " has rank " +
                                   std::to_string(c.pair.rank()) + ", expected " +
                                   std::to_string(r));
    }
  }
}

std::size_t max_rank(std::span<const ClientContribution> contribs) {
  std::size_t r = 0;
  for (const auto& c : contribs) r = std::max(r, c.pair.rank());
  return r;
}

std::vector<std::size_t> ranks_of(std::span<const ClientContribution> contribs) {
  std::vector<std::size_t> ranks;
  ranks.reserve(contribs.size());
  for (const auto& c : contribs) ranks.push_back(c.pair.rank());
  return ranks;
}

void fill_bias(AggregateResult& result) {
  result.bias_cosine = update_cosine(result.ideal_update, result.realized_update);
  result.bias_frobenius = frobenius_distance(result.ideal_update, result.realized_update);
}

std::int64_t downlink_for(Method method, const LoraPair& sample,
                          std::span<const ClientContribution> contribs) {
  const auto ranks = ranks_of(contribs);
  return comm_cost(method, sample.out_dim(), sample.in_dim(), ranks).downlink_floats;
}

AggregateResult averaged_result(std::span<const ClientContribution> contribs, Method method) {
  AggregateResult result;
  result.method = method;
  auto [a_bar, b_bar] = average_pairs(contribs);
  result.ideal_update = ideal_update(contribs);
  result.realized_update = approx_update(a_bar, b_bar);
  result.broadcast_a = std::move(a_bar);
  result.broadcast_b = std::move(b_bar);
  fill_bias(result);
  result.downlink_floats = downlink_for(method, contribs.front().pair, contribs);
  return result;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::kFedIt:
      return "fedit";
    case Method::kFfaLora:
      return "ffa-lora";
    case Method::kFlora:
      return "flora";
    case Method::kFlexLora:
      return "flexlora";
    case Method::kHetLora:
      return "hetlora";
    case Method::kLoraFair:
      return "lora-fair";
    case Method::kLoraFairHetLora:
      return "lora-fair+hetlora";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw UnsupportedMethodError("unknown aggregation method '" + std::string(name) + "'");
}

std::span<const Method> all_methods() noexcept { return kAllMethods; }

bool supports_heterogeneous_ranks(Method m) noexcept {
  switch (m) {
    case Method::kFedIt:
    case Method::kFfaLora:
    case Method::kLoraFair:
      return false;
    case Method::kFlora:
    case Method::kFlexLora:
    case Method::kHetLora:
    case Method::kLoraFairHetLora:
      return true;
  }
  return false;
}

std::vector<double> weights(std::span<const ClientContribution> contribs) {
  require_nonempty(contribs, "weights");
  std::int64_t total = 0;
  for (const auto& c : contribs) {
    if (c.sample_count < 1) {
      throw std::invalid_argument("weights: client " + std::to_string(c.client_id) +
                                  " has non-positive sample count");
    }
    total += c.sample_count;
  }
  std::vector<double> p;
  p.reserve(contribs.size());
  for (const auto& c : contribs) {
    p.push_back(static_cast<double>(c.sample_count) / static_cast<double>(total));
  }
  return p;
}

AveragedPair average_pairs(std::span<const ClientContribution> contribs) {
  require_nonempty(contribs, "average_pairs");
  const auto& first = contribs.front().pair;
  for (const auto& c : contribs) {
    if (c.pair.b().rows() != first.b().rows() || c.pair.rank() != first.rank() ||
        c.pair.a().cols() != first.a().cols()) {
      throw DimensionError("average_pairs: client " + std::to_string(c.client_id) + " has B " +
                           c.pair.b().shape_string() + ", A " + c.pair.a().shape_string() +
                           "; expected B " + first.b().shape_string() + ", A " +
                           first.a().shape_string());
    }
  }
  const auto p = weights(contribs);
  AveragedPair out{Matrix::zeros(first.a().rows(), first.a().cols()),
                   Matrix::zeros(first.b().rows(), first.b().cols())};
  for (std::size_t k = 0; k < contribs.size(); ++k) {
    accumulate(out.a_bar, p[k], contribs[k].pair.a());
    accumulate(out.b_bar, p[k], contribs[k].pair.b());
  }
  return out;
}

Matrix approx_update(const Matrix& a_bar, const Matrix& b_bar) {
  if (b_bar.cols() != a_bar.rows()) {
    throw DimensionError("approx_update: B_bar " + b_bar.shape_string() + " and A_bar " +
                         a_bar.shape_string() + " are not conformable");
  }
  return matmul(b_bar, a_bar);
}

Matrix ideal_update(std::span<const ClientContribution> contribs) {
  require_same_dims(contribs, "ideal_update");
  const auto p = weights(contribs);
  Matrix dw = Matrix::zeros(contribs.front().pair.out_dim(), contribs.front().pair.in_dim());
  for (std::size_t k = 0; k < contribs.size(); ++k) {
    accumulate(dw, p[k], effective_update(contribs[k].pair));
  }
  return dw;
}

double update_cosine(const Matrix& ideal, const Matrix& realized) {
  const bool ideal_zero = frobenius_norm(ideal) < kCosineNormFloor;
  const bool realized_zero = frobenius_norm(realized) < kCosineNormFloor;
  if (ideal_zero || realized_zero) return ideal_zero && realized_zero ? 1.0 : 0.0;
  return cosine_similarity_flat(ideal, realized);
}

AggregateResult aggregate_fedit(std::span<const ClientContribution> contribs) {
  require_same_rank(contribs, Method::kFedIt);
  return averaged_result(contribs, Method::kFedIt);
}

AggregateResult aggregate_ffa(std::span<const ClientContribution> contribs,
                              const Matrix& frozen_a) {
  require_same_rank(contribs, Method::kFfaLora);
  for (const auto& c : contribs) {
    if (!(c.pair.a() == frozen_a)) {
      throw ProtocolViolation("ffa-lora: client " + std::to_string(c.client_id) +
                              " returned an A factor that differs from the frozen A");
    }
  }
  AggregateResult result = averaged_result(contribs, Method::kFfaLora);
  result.broadcast_a = frozen_a;
  result.realized_update = approx_update(frozen_a, result.broadcast_b);
  fill_bias(result);
  return result;
}

AggregateResult aggregate_flora(std::span<const ClientContribution> contribs) {
  require_same_dims(contribs, "flora");
  const auto p = weights(contribs);
  std::vector<Matrix> b_blocks;
  std::vector<Matrix> a_blocks;
  for (std::size_t k = 0; k < contribs.size(); ++k) {
    b_blocks.push_back(scale(contribs[k].pair.b(), p[k]));
    a_blocks.push_back(contribs[k].pair.a());
  }
  AggregateResult result;
  result.method = Method::kFlora;
  result.broadcast_b = hstack(b_blocks);
  result.broadcast_a = vstack(a_blocks);
  result.ideal_update = ideal_update(contribs);
  result.fold_delta = matmul(result.broadcast_b, result.broadcast_a);
  result.realized_update = *result.fold_delta;
  result.reinit_required = true;
  fill_bias(result);
  result.downlink_floats = downlink_for(Method::kFlora, contribs.front().pair, contribs);
  return result;
}

AggregateResult aggregate_flexlora(std::span<const ClientContribution> contribs,
                                   std::size_t target_rank) {
  require_same_dims(contribs, "flexlora");
  const auto& first = contribs.front().pair;
  if (target_rank == 0 || target_rank > std::min(first.out_dim(), first.in_dim())) {
    throw DimensionError("flexlora: target rank " + std::to_string(target_rank) +
                         " outside [1, min(d, l)]");
  }
  AggregateResult result;
  result.method = Method::kFlexLora;
  result.ideal_update = ideal_update(contribs);
  const SvdResult svd = truncated_svd(result.ideal_update, target_rank);
  // Split sqrt(S) symmetrically: B = U sqrt(S), A = sqrt(S) V^T.
  Matrix b = svd.u;
  Matrix a = transpose(svd.v);
  for (std::size_t j = 0; j < target_rank; ++j) {
    const double root = std::sqrt(svd.s[j]);
    for (std::size_t i = 0; i < b.rows(); ++i) b(i, j) *= root;
    for (double& v : a.row(j)) v *= root;
  }
  result.realized_update = matmul(b, a);
  result.broadcast_b = std::move(b);
  result.broadcast_a = std::move(a);
  fill_bias(result);
  result.downlink_floats = downlink_for(Method::kFlexLora, first, contribs);
  return result;
}

std::vector<ClientContribution> hetlora_pad(std::span<const ClientContribution> contribs,
                                            std::size_t r_max) {
  require_same_dims(contribs, "hetlora_pad");
  if (max_rank(contribs) > r_max) {
    throw DimensionError("hetlora_pad: r_max " + std::to_string(r_max) +
                         " is below the largest client rank " + std::to_string(max_rank(contribs)));
  }
  std::vector<ClientContribution> padded;
  padded.reserve(contribs.size());
  for (const auto& c : contribs) {
    const auto& pair = c.pair;
    padded.push_back({LoraPair(pad_zero(pair.b(), pair.out_dim(), r_max),
                               pad_zero(pair.a(), r_max, pair.in_dim())),
                      c.sample_count, c.client_id});
  }
  return padded;
}

LoraPair hetlora_truncate(const LoraPair& pair, std::size_t r_k) {
  if (r_k == 0 || r_k > pair.rank()) {
    throw DimensionError("hetlora_truncate: rank " + std::to_string(r_k) + " outside [1, " +
                         std::to_string(pair.rank()) + "]");
  }
  if (r_k == pair.rank()) return pair;
  return LoraPair(slice_cols(pair.b(), 0, r_k), slice_rows(pair.a(), 0, r_k));
}

AggregateResult aggregate_hetlora(std::span<const ClientContribution> contribs) {
  const auto padded = hetlora_pad(contribs, max_rank(contribs));
  AggregateResult result = averaged_result(padded, Method::kHetLora);
  result.downlink_floats = downlink_for(Method::kHetLora, contribs.front().pair, contribs);
  return result;
}

AggregateResult aggregate_lorafair(std::span<const ClientContribution> contribs,
                                   const SolverConfig& solver_cfg) {
  require_same_rank(contribs, Method::kLoraFair);
  AggregateResult result = averaged_result(contribs, Method::kLoraFair);
  if (solver_cfg.max_steps == 0) return result;
  // Nothing to align when either side of the cosine is zero.
  if (frobenius_norm(result.ideal_update) < kCosineNormFloor ||
      frobenius_norm(result.realized_update) < kCosineNormFloor) {
    return result;
  }
  SolverReport report =
      solve(result.ideal_update, result.broadcast_a, result.broadcast_b, solver_cfg);
  if (solver_cfg.residual_position == ResidualPosition::kOnB) {
    accumulate(result.broadcast_b, 1.0, report.delta);
  } else {
    accumulate(result.broadcast_a, 1.0, report.delta);
  }
  result.realized_update = approx_update(result.broadcast_a, result.broadcast_b);
  fill_bias(result);
  result.solver = std::move(report);
  return result;
}

AggregateResult aggregate_lorafair_hetlora(std::span<const ClientContribution> contribs,
                                           const SolverConfig& solver_cfg) {
  const auto padded = hetlora_pad(contribs, max_rank(contribs));
  AggregateResult result = aggregate_lorafair(padded, solver_cfg);
  result.method = Method::kLoraFairHetLora;
  result.downlink_floats =
      downlink_for(Method::kLoraFairHetLora, contribs.front().pair, contribs);
  return result;
}

CommCost comm_cost(Method method, std::size_t d, std::size_t l,
                   std::span<const std::size_t> ranks) {
  CommCost cost;
  if (ranks.empty()) return cost;
  const auto dl = static_cast<std::int64_t>(d + l);
  const auto dd = static_cast<std::int64_t>(d);
  const auto r_sum = static_cast<std::int64_t>(std::accumulate(ranks.begin(), ranks.end(), std::size_t{0}));
  const auto r_max = static_cast<std::int64_t>(*std::max_element(ranks.begin(), ranks.end()));
  switch (method) {
    case Method::kFfaLora:
      cost.uplink_floats = r_sum * dd;
      cost.downlink_floats = r_max * dd;
      break;
    case Method::kFlora:
      cost.uplink_floats = r_sum * dl;
      cost.downlink_floats = r_sum * dl;
      break;
    case Method::kFedIt:
    case Method::kFlexLora:
    case Method::kHetLora:
    case Method::kLoraFair:
    case Method::kLoraFairHetLora:
      cost.uplink_floats = r_sum * dl;
      cost.downlink_floats = r_max * dl;
      break;
  }
  return cost;
}

}  // namespace lorafair
