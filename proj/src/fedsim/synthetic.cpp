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

#include "lorafair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lorafair/errors.hpp"
#include "lorafair/kernels.hpp"
#include "lorafair/linalg.hpp"

namespace lorafair {
namespace {

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<int> balanced_labels(std::size_t n, std::size_t num_classes) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % num_classes);
  return labels;
}

int nearest_prototype(const SyntheticTask& task, int domain, std::span<const double> x) {
  // Undo the domain rotation, then pick the prototype with the largest inner
  // product (prototypes share one norm).
  const Matrix& t = task.domain_transforms[static_cast<std::size_t>(domain)];
  const std::size_t l = task.input_dim();
  std::vector<double> z(l, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) z[j] += t(i, j) * x[i];
  }
  int best = 0;
  double best_score = -INFINITY;
  for (std::size_t c = 0; c < task.num_classes(); ++c) {
    const double s = kernels::active().dot(task.prototypes.row(c).data(), z.data(), l);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

SyntheticTask make_task(const TaskSpec& spec, RngSeed seed) {
  if (spec.input_dim == 0 || spec.num_classes < 2 || spec.num_domains == 0) {
    throw std::invalid_argument("make_task: need input_dim >= 1, num_classes >= 2, num_domains >= 1");
  }
  if (!(spec.noise_std > 0.0) || spec.domain_shift < 0.0 || !(spec.base_scale >= 0.0) ||
      !(spec.source_gap >= 0.0)) {
    throw std::invalid_argument(
        "make_task: noise_std must be > 0 and domain_shift, base_scale, source_gap >= 0");
  }
  SyntheticTask task;
  task.spec = spec;
  const std::size_t l = spec.input_dim;

  task.prototypes = gaussian_fill(spec.num_classes, l, 1.0, derive_seed(seed, "prototypes"));
  const double target_norm = std::sqrt(static_cast<double>(l));
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    auto row = task.prototypes.row(c);
    const double n = std::sqrt(kernels::active().sum_squares(row.data(), l));
    for (double& v : row) v *= target_norm / n;
  }

  for (std::size_t m = 0; m < spec.num_domains; ++m) {
    Matrix mix = Matrix::identity(l);
    if (spec.domain_shift > 0.0) {
      accumulate(mix, spec.domain_shift / std::sqrt(static_cast<double>(l)),
                 gaussian_fill(l, l, 1.0, derive_seed(seed, "domain", {m})));
    }
    task.domain_transforms.push_back(orthonormal_qr(mix));
  }

  Matrix source = task.prototypes;
  if (spec.source_gap > 0.0 && spec.source_gap_rank > 0) {
    const std::size_t k = std::min(spec.source_gap_rank, l);
    const Matrix basis = orthonormal_qr(gaussian_fill(l, k, 1.0, derive_seed(seed, "gap-basis")));
    const double std = spec.source_gap * std::sqrt(static_cast<double>(l) / static_cast<double>(k));
    const Matrix coeffs = gaussian_fill(spec.num_classes, k, std, derive_seed(seed, "gap-coeffs"));
    accumulate(source, -1.0, matmul_nt(coeffs, basis));
  }
  task.pretrained = FrozenBase(scale(source, spec.base_scale));

  // Oracle accuracy on an independent class-balanced sample.
  constexpr std::size_t kOraclePerDomain = 500;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t m = 0; m < spec.num_domains; ++m) {
    const auto data = sample_domain(task, static_cast<int>(m),
                                    balanced_labels(kOraclePerDomain, spec.num_classes),
                                    derive_seed(seed, "oracle", {m}));
    for (std::size_t i = 0; i < data.size(); ++i) {
      correct += nearest_prototype(task, static_cast<int>(m), data.inputs.row(i)) == data.labels[i];
      ++total;
    }
  }
  task.oracle_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return task;
}

ClientDataset sample_domain(const SyntheticTask& task, int domain, std::vector<int> labels,
                            RngSeed seed) {
  if (domain < 0 || static_cast<std::size_t>(domain) >= task.num_domains()) {
    throw std::invalid_argument("sample_domain: domain " + std::to_string(domain) + " out of range");
  }
  if (labels.empty()) throw std::invalid_argument("sample_domain: no labels requested");
  const std::size_t l = task.input_dim();
  const Matrix& t = task.domain_transforms[static_cast<std::size_t>(domain)];
  Rng rng(seed);
  // Rows hold prototype + noise; rotating every row is X * T^T.
  Matrix raw(labels.size(), l);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || c >= task.num_classes()) {
      throw std::invalid_argument("sample_domain: label out of range");
    }
    auto row = raw.row(i);
    for (std::size_t j = 0; j < l; ++j) {
      row[j] = task.prototypes(c, j) + task.spec.noise_std * rng.normal();
    }
  }
  return ClientDataset{matmul_nt(raw, t), std::move(labels), domain};
}

std::vector<ClientDataset> gen_feature_noniid(const SyntheticTask& task, std::size_t num_clients,
                                              std::size_t samples_per_client, RngSeed seed) {
  if (num_clients == 0 || samples_per_client == 0) {
    throw std::invalid_argument("gen_feature_noniid: need at least one client and one sample");
  }
  std::vector<ClientDataset> clients;
  clients.reserve(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    auto labels = balanced_labels(samples_per_client, task.num_classes());
    Rng order(derive_seed(seed, "feature-labels", {k}));
    shuffle(labels, order);
    clients.push_back(sample_domain(task, static_cast<int>(k % task.num_domains()),
                                    std::move(labels), derive_seed(seed, "feature-data", {k})));
  }
  return clients;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& proportions) {
  if (proportions.empty()) throw std::invalid_argument("apportion: no proportions");
  const double sum = std::accumulate(proportions.begin(), proportions.end(), 0.0);
  std::vector<std::size_t> parts(proportions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const double exact = static_cast<double>(total) * proportions[i] / sum;
    parts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += parts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    ++parts[remainders[i % remainders.size()].second];
  }
  return parts;
}

std::vector<ClientDataset> gen_label_noniid(const SyntheticTask& task, std::size_t num_clients,
                                            double alpha, std::size_t samples_per_client,
                                            RngSeed seed) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gen_label_noniid: alpha must be > 0");
  if (num_clients == 0 || samples_per_client == 0) {
    throw std::invalid_argument("gen_label_noniid: need at least one client and one sample");
  }
  const std::size_t num_domains = task.num_domains();
  const std::size_t d = task.num_classes();
  Rng rng(derive_seed(seed, "dirichlet"));

  std::vector<std::vector<int>> client_labels(num_clients);
  for (std::size_t m = 0; m < num_domains && m < num_clients; ++m) {
    std::vector<std::size_t> members;
    for (std::size_t k = m; k < num_clients; k += num_domains) members.push_back(k);
    const auto per_class = apportion(members.size() * samples_per_client,
                                     std::vector<double>(d, 1.0));
    for (std::size_t c = 0; c < d; ++c) {
      std::vector<double> share(members.size());
      for (double& s : share) s = rng.gamma(alpha);
      // All-underflow draws at tiny alpha: fall back to a single owner.
      if (std::accumulate(share.begin(), share.end(), 0.0) <= 0.0) {
        std::fill(share.begin(), share.end(), 0.0);
        share[rng.uniform_index(share.size())] = 1.0;
      }
      const auto counts = apportion(per_class[c], share);
      for (std::size_t i = 0; i < members.size(); ++i) {
        client_labels[members[i]].insert(client_labels[members[i]].end(), counts[i],
                                         static_cast<int>(c));
      }
    }
    // Keep every client non-empty by moving one sample from the largest.
    for (std::size_t k : members) {
      if (!client_labels[k].empty()) continue;
      auto donor = std::max_element(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return client_labels[a].size() < client_labels[b].size();
      });
      client_labels[k].push_back(client_labels[*donor].back());
      client_labels[*donor].pop_back();
    }
  }

  std::vector<ClientDataset> clients;
  clients.reserve(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) {
    Rng order(derive_seed(seed, "label-order", {k}));
    shuffle(client_labels[k], order);
    clients.push_back(sample_domain(task, static_cast<int>(k % num_domains),
                                    std::move(client_labels[k]),
                                    derive_seed(seed, "label-data", {k})));
  }
  return clients;
}

std::vector<ClientDataset> make_test_sets(const SyntheticTask& task, std::size_t per_domain,
                                          RngSeed seed) {
  std::vector<ClientDataset> sets;
  for (std::size_t m = 0; m < task.num_domains(); ++m) {
    sets.push_back(sample_domain(task, static_cast<int>(m),
                                 balanced_labels(per_domain, task.num_classes()),
                                 derive_seed(seed, "test", {m})));
  }
  return sets;
}

std::vector<std::size_t> class_histogram(const ClientDataset& data, std::size_t num_classes) {
  std::vector<std::size_t> hist(num_classes, 0);
  for (int c : data.labels) ++hist.at(static_cast<std::size_t>(c));
  return hist;
}

}  // namespace lorafair
