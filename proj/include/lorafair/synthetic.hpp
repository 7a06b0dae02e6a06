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
#include <vector>

#include "lorafair/lora.hpp"
#include "lorafair/matrix.hpp"
#include "lorafair/rng.hpp"

namespace lorafair {

struct TaskSpec {
  std::size_t input_dim = 32;    ///< l
  std::size_t num_classes = 10;  ///< d
  std::size_t num_domains = 6;   ///< M
  double noise_std = 1.0;
  /// 0 keeps every domain at the identity transform; large values give
  /// fully random rotations.
  double domain_shift = 2.0;
  /// Logit scale of the pre-trained classifier W0 = scale * source means.
  double base_scale = 0.1;
  /// The base is fit to source class means that differ from the target
  /// prototypes by a rank-`source_gap_rank` shift whose rows have
  /// `source_gap` times the prototype norm (in expectation).
  double source_gap = 1.5;
  std::size_t source_gap_rank = 4;
};

/// Multi-domain classification problem. A sample of domain m and class c is
/// x = T_m (prototype_c + noise).
struct SyntheticTask {
  TaskSpec spec;
  std::vector<Matrix> domain_transforms;  ///< M orthogonal l x l matrices
  Matrix prototypes;                      ///< d x l, one row per class, equal norms
  FrozenBase pretrained{Matrix{}};        ///< classifier fit to the source means
  double oracle_accuracy = 0.0;           ///< nearest-prototype accuracy with known T_m

  std::size_t input_dim() const noexcept { return spec.input_dim; }
  std::size_t num_classes() const noexcept { return spec.num_classes; }
  std::size_t num_domains() const noexcept { return spec.num_domains; }
};

/// Builds prototypes, domain rotations (QR of I + shift * G / sqrt(l)), the
/// pre-trained base, and measures the nearest-prototype oracle accuracy on
/// an independent sample.
SyntheticTask make_task(const TaskSpec& spec, RngSeed seed);

struct ClientDataset {
  Matrix inputs;            ///< n x l
  std::vector<int> labels;  ///< n entries in [0, d)
  int domain_id = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Draws one sample per entry of `labels` from `domain` into an n x l matrix.
ClientDataset sample_domain(const SyntheticTask& task, int domain, std::vector<int> labels,
                            RngSeed seed);

/// Client k draws every sample from domain k mod M with a class-balanced label
/// multiset (shuffled).
std::vector<ClientDataset> gen_feature_noniid(const SyntheticTask& task, std::size_t num_clients,
                                              std::size_t samples_per_client, RngSeed seed);

/// Clients are assigned to domains round-robin; within each domain every
/// class's samples are split across that domain's clients with Dirichlet(alpha)
/// proportions. Client sizes vary but the total is exactly
/// num_clients * samples_per_client, and every client keeps at least one sample.
std::vector<ClientDataset> gen_label_noniid(const SyntheticTask& task, std::size_t num_clients,
                                            double alpha, std::size_t samples_per_client,
                                            RngSeed seed);

/// One class-balanced held-out set per domain.
std::vector<ClientDataset> make_test_sets(const SyntheticTask& task, std::size_t per_domain,
                                          RngSeed seed);

/// Counts per class.
std::vector<std::size_t> class_histogram(const ClientDataset& data, std::size_t num_classes);

/// Splits `total` into round(total * p_i) with largest-remainder correction so
/// the parts sum to `total` exactly.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& proportions);

}  // namespace lorafair
