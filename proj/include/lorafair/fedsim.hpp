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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorafair/aggregation.hpp"
#include "lorafair/lora.hpp"
#include "lorafair/metrics.hpp"
#include "lorafair/residual_solver.hpp"
#include "lorafair/rng.hpp"
#include "lorafair/synthetic.hpp"

namespace lorafair {

/// How clients start the next round.
enum class InitPolicy {
  kAuto,          ///< ReInitial for FLoRA, AvgInitial otherwise
  kAvgInitial,    ///< continue from the broadcast (averaged) pair
  kReInitial,     ///< fold the round's update into the base, fresh pair
  kLocalInitial,  ///< continue from one random participant's last local pair
};

std::string_view policy_name(InitPolicy p) noexcept;
InitPolicy parse_policy(std::string_view name);

enum class Partition {
  kFeature,       ///< one domain per client, balanced labels
  kFeatureLabel,  ///< domains shared by several clients, Dirichlet label split
};

std::string_view partition_name(Partition p) noexcept;
Partition parse_partition(std::string_view name);

struct FedConfig {
  TaskSpec task;
  std::size_t num_clients = 6;
  int rounds = 30;
  int local_iters = 5;  ///< mini-batch SGD steps per client per round
  std::size_t batch_size = 32;
  double learning_rate = 0.3;
  double participation_fraction = 1.0;
  Method method = Method::kLoraFair;
  InitPolicy init_policy = InitPolicy::kAuto;
  std::size_t rank = 4;
  std::vector<std::size_t> client_ranks;  ///< empty: every client uses `rank`
  double init_std = kDefaultInitStd;
  SolverConfig solver;
  Partition partition = Partition::kFeature;
  double dirichlet_alpha = 0.5;
  std::size_t samples_per_client = 600;
  std::size_t test_samples_per_domain = 200;
  std::uint64_t seed = 1;

  /// Rank of client k.
  std::size_t rank_of(std::size_t k) const;
  std::size_t max_rank() const;
  bool heterogeneous() const;
};

/// Throws ConfigError naming the violated invariant.
void validate(const FedConfig& cfg);

/// Policy actually applied for cfg.method (resolves kAuto); throws
/// ConfigError for combinations the method cannot honour.
InitPolicy effective_policy(Method method, InitPolicy requested);

struct GlobalState {
  FrozenBase base;
  LoraPair pair;
  int round_index = 0;
};

struct LocalTrainConfig {
  int local_iters = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  bool train_a = true;  ///< false under FFA-LoRA
};

struct LocalTrainResult {
  LoraPair pair;
  double last_loss = 0.0;  ///< mini-batch loss at the final step
};

/// Mini-batch SGD on the adapter for cfg.local_iters steps. Batches walk a
/// per-epoch shuffled order of the client data. Throws TrainingDivergedError
/// on a non-finite loss.
LocalTrainResult local_train(const FrozenBase& base, const LoraPair& start,
                             const ClientDataset& data, const LocalTrainConfig& cfg, RngSeed seed);

struct BroadcastContext {
  std::size_t d = 0;
  std::size_t l = 0;
  std::size_t rank = 0;  ///< rank of a freshly initialized pair
  double init_std = kDefaultInitStd;
  RngSeed seed;          ///< stream for fresh pairs and the LocalInitial draw
  /// Participants' trained pairs (LocalInitial draws one uniformly).
  std::vector<LoraPair> local_pairs;
};

/// Next round's global state. AvgInitial keeps the base and installs the
/// broadcast pair. ReInitial folds the round's change (realized update minus
/// the starting adapter) into the base and starts a fresh pair. LocalInitial
/// folds the same change and continues from one participant's trained pair.
GlobalState apply_broadcast(const GlobalState& state, const AggregateResult& result,
                            InitPolicy policy, const BroadcastContext& ctx);

/// Aggregation dispatch for cfg.method. frozen_a is required for FFA-LoRA.
AggregateResult aggregate(const FedConfig& cfg, std::span<const ClientContribution> contribs,
                          const Matrix* frozen_a);

struct ExperimentResult {
  std::vector<RoundRecord> records;
  RunSummary summary;
};

/// Owns the task, client data and global state of one run.
class Simulation {
 public:
  explicit Simulation(FedConfig cfg);

  const FedConfig& config() const noexcept { return cfg_; }
  const SyntheticTask& task() const noexcept { return task_; }
  const std::vector<ClientDataset>& clients() const noexcept { return clients_; }
  const std::vector<ClientDataset>& test_sets() const noexcept { return test_sets_; }
  const GlobalState& state() const noexcept { return state_; }
  /// Aggregate of the most recent round.
  const std::optional<AggregateResult>& last_aggregate() const noexcept { return last_aggregate_; }

  Evaluation evaluate_current() const;

  /// Participants of round `round` (1-based), ascending client ids.
  std::vector<std::size_t> sample_participants(int round) const;

  /// Trains sampled clients from the current broadcast, aggregates, applies
  /// the broadcast policy and evaluates.
  RoundRecord run_round();

  ExperimentResult run();

 private:
  FedConfig cfg_;
  InitPolicy policy_;
  SyntheticTask task_;
  std::vector<ClientDataset> clients_;
  std::vector<ClientDataset> test_sets_;
  GlobalState state_;
  Matrix frozen_a_;
  std::optional<AggregateResult> last_aggregate_;
};

ExperimentResult run_experiment(const FedConfig& cfg);

}  // namespace lorafair
