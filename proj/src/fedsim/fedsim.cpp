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

#include "lorafair/fedsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lorafair/config.hpp"
#include "lorafair/errors.hpp"
#include "lorafair/model.hpp"

namespace lorafair {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

LoraPair pad_pair(const LoraPair& pair, std::size_t rank) {
  if (pair.rank() == rank) return pair;
  return LoraPair(pad_zero(pair.b(), pair.out_dim(), rank), pad_zero(pair.a(), rank, pair.in_dim()));
}

GlobalState initial_state(const FedConfig& cfg, const SyntheticTask& task) {
  return GlobalState{task.pretrained,
                     init_pair(task.num_classes(), task.input_dim(), cfg.max_rank(), cfg.init_std,
                               derive_seed(RngSeed{cfg.seed}, "init")),
                     0};
}

std::vector<ClientDataset> make_clients(const FedConfig& cfg, const SyntheticTask& task) {
  const RngSeed seed = derive_seed(RngSeed{cfg.seed}, "data");
  if (cfg.partition == Partition::kFeature) {
    return gen_feature_noniid(task, cfg.num_clients, cfg.samples_per_client, seed);
  }
  return gen_label_noniid(task, cfg.num_clients, cfg.dirichlet_alpha, cfg.samples_per_client, seed);
}

}  // namespace

std::string_view policy_name(InitPolicy p) noexcept {
  switch (p) {
    case InitPolicy::kAuto:
      return "auto";
    case InitPolicy::kAvgInitial:
      return "avg-initial";
    case InitPolicy::kReInitial:
      return "re-initial";
    case InitPolicy::kLocalInitial:
      return "local-initial";
  }
  return "unknown";
}

InitPolicy parse_policy(std::string_view name) {
  for (auto p : {InitPolicy::kAuto, InitPolicy::kAvgInitial, InitPolicy::kReInitial,
                 InitPolicy::kLocalInitial}) {
    if (policy_name(p) == name) return p;
  }
  throw ConfigError("unknown init_policy '" + std::string(name) + "'");
}

std::string_view partition_name(Partition p) noexcept {
  return p == Partition::kFeature ? "feature" : "feature-label";
}

Partition parse_partition(std::string_view name) {
  if (name == "feature") return Partition::kFeature;
  if (name == "feature-label") return Partition::kFeatureLabel;
  throw ConfigError("unknown partition '" + std::string(name) + "'");
}

std::size_t FedConfig::rank_of(std::size_t k) const {
  return client_ranks.empty() ? rank : client_ranks.at(k);
}

std::size_t FedConfig::max_rank() const {
  if (client_ranks.empty()) return rank;
  return *std::max_element(client_ranks.begin(), client_ranks.end());
}

bool FedConfig::heterogeneous() const {
  return std::adjacent_find(client_ranks.begin(), client_ranks.end(), std::not_equal_to<>()) !=
         client_ranks.end();
}

InitPolicy effective_policy(Method method, InitPolicy requested) {
  if (method == Method::kFlora) {
    if (requested == InitPolicy::kAuto || requested == InitPolicy::kReInitial) {
      return InitPolicy::kReInitial;
    }
    throw ConfigError("init_policy: flora folds into the base and re-initializes every round; '" +
                      std::string(policy_name(requested)) + "' is not applicable");
  }
  if (method == Method::kFfaLora && requested != InitPolicy::kAuto &&
      requested != InitPolicy::kAvgInitial) {
    throw ConfigError("init_policy: ffa-lora keeps A frozen across rounds and requires avg-initial");
  }
  return requested == InitPolicy::kAuto ? InitPolicy::kAvgInitial : requested;
}

void validate(const FedConfig& cfg) {
  const std::size_t d = cfg.task.num_classes;
  const std::size_t l = cfg.task.input_dim;
  const std::size_t bound = std::min(d, l);
  if (cfg.num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (cfg.rounds < 0) throw ConfigError("rounds must be >= 0");
  if (cfg.local_iters < 1) throw ConfigError("local_iters (E) must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(cfg.participation_fraction > 0.0 && cfg.participation_fraction <= 1.0)) {
    throw ConfigError("participation_fraction must lie in (0, 1]");
  }
  if (cfg.rank < 1 || cfg.rank > bound) {
    throw ConfigError("rank " + std::to_string(cfg.rank) + " violates 1 <= rank <= min(d,l) = " +
                      std::to_string(bound));
  }
  if (!cfg.client_ranks.empty()) {
    if (cfg.client_ranks.size() != cfg.num_clients) {
      throw ConfigError("client_ranks must list one rank per client (" +
                        std::to_string(cfg.num_clients) + ")");
    }
    for (std::size_t r : cfg.client_ranks) {
      if (r < 1 || r > bound) {
        throw ConfigError("client_ranks entry " + std::to_string(r) +
                          " violates 1 <= rank <= min(d,l) = " + std::to_string(bound));
      }
    }
    if (cfg.heterogeneous() && !supports_heterogeneous_ranks(cfg.method)) {
      throw ConfigError("method " + std::string(method_name(cfg.method)) +
                        " does not support heterogeneous client ranks");
    }
  }
  if (!(cfg.init_std > 0.0)) throw ConfigError("init_std must be > 0");
  if (!(cfg.solver.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (cfg.solver.max_steps < 0) throw ConfigError("solver_max_steps must be >= 0");
  if (!(cfg.solver.learning_rate > 0.0)) throw ConfigError("solver_learning_rate must be > 0");
  if (!(cfg.solver.grad_tol > 0.0)) throw ConfigError("solver_grad_tol must be > 0");
  if (!(cfg.dirichlet_alpha > 0.0)) throw ConfigError("dirichlet_alpha must be > 0");
  if (cfg.samples_per_client < 1) throw ConfigError("samples_per_client must be >= 1");
  if (cfg.test_samples_per_domain < 1) throw ConfigError("test_samples_per_domain must be >= 1");
  if (cfg.task.num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (cfg.task.num_domains < 1) throw ConfigError("num_domains must be >= 1");
  if (cfg.task.input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (!(cfg.task.noise_std > 0.0)) throw ConfigError("noise_std must be > 0");
  if (!(cfg.task.domain_shift >= 0.0)) throw ConfigError("domain_shift must be >= 0");
  if (!(cfg.task.base_scale >= 0.0)) throw ConfigError("base_scale must be >= 0");
  if (!(cfg.task.source_gap >= 0.0)) throw ConfigError("source_gap must be >= 0");
  if (cfg.task.source_gap_rank > cfg.task.input_dim) {
    throw ConfigError("source_gap_rank must be <= input_dim");
  }
  effective_policy(cfg.method, cfg.init_policy);
}

LocalTrainResult local_train(const FrozenBase& base, const LoraPair& start,
                             const ClientDataset& data, const LocalTrainConfig& cfg, RngSeed seed) {
  if (start.out_dim() != base.weights().rows() || start.in_dim() != base.weights().cols()) {
    throw DimensionError("local_train: adapter " + std::to_string(start.out_dim()) + "x" +
                         std::to_string(start.in_dim()) + " does not match base " +
                         base.weights().shape_string());
  }
  if (data.size() == 0) throw std::invalid_argument("local_train: empty dataset");
  const std::size_t n = data.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = n;  // forces a shuffle before the first batch

  Matrix b = start.b();
  Matrix a = start.a();
  double last_loss = 0.0;
  Matrix xb(batch, data.inputs.cols());
  std::vector<int> yb(batch);
  for (int step = 0; step < cfg.local_iters; ++step) {
    for (std::size_t i = 0; i < batch; ++i) {
      if (cursor == n) {
        for (std::size_t j = n; j > 1; --j) std::swap(order[j - 1], order[rng.uniform_index(j)]);
        cursor = 0;
      }
      const std::size_t src = order[cursor++];
      auto row = data.inputs.row(src);
      std::copy(row.begin(), row.end(), xb.row(i).begin());
      yb[i] = data.labels[src];
    }
    const LoraPair current(b, a);
    const AdapterGradient g = adapter_gradient(base, current, xb, yb);
    if (!std::isfinite(g.loss)) {
      throw TrainingDivergedError("local_train: non-finite loss at step " + std::to_string(step) +
                                  " on domain " + std::to_string(data.domain_id));
    }
    last_loss = g.loss;
    accumulate(b, -cfg.learning_rate, g.grad_b);
    if (cfg.train_a) accumulate(a, -cfg.learning_rate, g.grad_a);
  }
  return {LoraPair(std::move(b), std::move(a)), last_loss};
}

GlobalState apply_broadcast(const GlobalState& state, const AggregateResult& result,
                            InitPolicy policy, const BroadcastContext& ctx) {
  const InitPolicy resolved = effective_policy(result.method, policy);
  if (result.reinit_required && resolved != InitPolicy::kReInitial) {
    throw ConfigError("apply_broadcast: method requires re-initialization");
  }
  switch (resolved) {
    case InitPolicy::kAuto:
    case InitPolicy::kAvgInitial:
      return GlobalState{state.base, LoraPair(result.broadcast_b, result.broadcast_a),
                         state.round_index};
    case InitPolicy::kReInitial: {
      // Only the round's change is folded; the starting adapter is already
      // part of the realized product.
      const Matrix& realized = result.fold_delta ? *result.fold_delta : result.realized_update;
      const Matrix delta = subtract(realized, effective_update(state.pair));
      return GlobalState{fold_into_base(state.base, delta),
                         init_pair(ctx.d, ctx.l, ctx.rank, ctx.init_std, ctx.seed),
                         state.round_index};
    }
    case InitPolicy::kLocalInitial: {
      if (ctx.local_pairs.empty()) {
        throw std::invalid_argument("apply_broadcast: local-initial needs the participants' pairs");
      }
      Rng rng(ctx.seed);
      const LoraPair& chosen = ctx.local_pairs[rng.uniform_index(ctx.local_pairs.size())];
      // The base takes the round's change and the client keeps its own pair on
      // top, so client j's update is counted twice (the drift this policy has).
      const Matrix delta = subtract(result.realized_update, effective_update(state.pair));
      return GlobalState{fold_into_base(state.base, delta), chosen, state.round_index};
    }
  }
  throw std::logic_error("apply_broadcast: unhandled policy");
}

AggregateResult aggregate(const FedConfig& cfg, std::span<const ClientContribution> contribs,
                          const Matrix* frozen_a) {
  switch (cfg.method) {
    case Method::kFedIt:
      return aggregate_fedit(contribs);
    case Method::kFfaLora:
      if (frozen_a == nullptr) throw std::invalid_argument("aggregate: ffa-lora needs the frozen A");
      return aggregate_ffa(contribs, *frozen_a);
    case Method::kFlora:
      return aggregate_flora(contribs);
    case Method::kFlexLora:
      return aggregate_flexlora(contribs, cfg.max_rank());
    case Method::kHetLora:
      return aggregate_hetlora(hetlora_pad(contribs, cfg.max_rank()));
    case Method::kLoraFair:
      return aggregate_lorafair(contribs, cfg.solver);
    case Method::kLoraFairHetLora:
      return aggregate_lorafair_hetlora(hetlora_pad(contribs, cfg.max_rank()), cfg.solver);
  }
  throw std::logic_error("aggregate: unhandled method");
}

Simulation::Simulation(FedConfig cfg)
    : cfg_((validate(cfg), std::move(cfg))),
      policy_(effective_policy(cfg_.method, cfg_.init_policy)),
      task_(make_task(cfg_.task, derive_seed(RngSeed{cfg_.seed}, "task"))),
      clients_(make_clients(cfg_, task_)),
      test_sets_(make_test_sets(task_, cfg_.test_samples_per_domain,
                                derive_seed(RngSeed{cfg_.seed}, "test-data"))),
      state_(initial_state(cfg_, task_)),
      frozen_a_(state_.pair.a()) {}

Evaluation Simulation::evaluate_current() const {
  return evaluate(state_.base, state_.pair, test_sets_);
}

std::vector<std::size_t> Simulation::sample_participants(int round) const {
  const std::size_t k = cfg_.num_clients;
  const auto m = static_cast<std::size_t>(
      std::ceil(cfg_.participation_fraction * static_cast<double>(k) - 1e-9));
  const std::size_t take = std::clamp<std::size_t>(m, 1, k);
  std::vector<std::size_t> ids(k);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (take < k) {
    Rng rng(derive_seed(RngSeed{cfg_.seed}, "participation", {static_cast<std::uint64_t>(round)}));
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(ids[i], ids[i + rng.uniform_index(k - i)]);
    }
    ids.resize(take);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

RoundRecord Simulation::run_round() {
  const int round = state_.round_index + 1;
  const auto participants = sample_participants(round);
  const LocalTrainConfig local{cfg_.local_iters, cfg_.batch_size, cfg_.learning_rate,
                               cfg_.method != Method::kFfaLora};
  const std::size_t d = task_.num_classes();
  const std::size_t l = task_.input_dim();

  RoundRecord record;
  record.round = round;
  record.participants = static_cast<int>(participants.size());

  std::vector<ClientContribution> contribs;
  std::vector<std::size_t> ranks;
  double loss_sum = 0.0;
  for (std::size_t k : participants) {
    const std::size_t r_k = cfg_.rank_of(k);
    const LoraPair start = hetlora_truncate(state_.pair, r_k);
    const auto t0 = Clock::now();
    LocalTrainResult trained =
        local_train(state_.base, start, clients_[k], local,
                    derive_seed(RngSeed{cfg_.seed}, "local",
                                {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(k)}));
    record.client_train_seconds += seconds_since(t0);
    loss_sum += trained.last_loss;
    contribs.push_back({std::move(trained.pair), static_cast<std::int64_t>(clients_[k].size()),
                        static_cast<int>(k)});
    ranks.push_back(r_k);
  }
  record.train_loss = loss_sum / static_cast<double>(participants.size());

  const auto t0 = Clock::now();
  AggregateResult result = aggregate(cfg_, contribs, &frozen_a_);
  const double server_seconds = seconds_since(t0);
  switch (cfg_.method) {
    case Method::kFlexLora:
    case Method::kLoraFair:
    case Method::kLoraFairHetLora:
      record.server_solve_seconds = server_seconds;
      break;
    default:
      break;
  }

  // Heterogeneous rounds may not include the largest-rank client.
  if (result.broadcast_a.rows() < cfg_.max_rank() && !result.reinit_required) {
    result.broadcast_b = pad_zero(result.broadcast_b, d, cfg_.max_rank());
    result.broadcast_a = pad_zero(result.broadcast_a, cfg_.max_rank(), l);
  }

  BroadcastContext ctx;
  ctx.d = d;
  ctx.l = l;
  ctx.rank = cfg_.max_rank();
  ctx.init_std = cfg_.init_std;
  ctx.seed = derive_seed(RngSeed{cfg_.seed}, "broadcast", {static_cast<std::uint64_t>(round)});
  for (const auto& c : contribs) ctx.local_pairs.push_back(pad_pair(c.pair, cfg_.max_rank()));
  state_ = apply_broadcast(state_, result, policy_, ctx);
  state_.round_index = round;

  const CommCost comm = comm_cost(cfg_.method, d, l, ranks);
  record.uplink_floats = comm.uplink_floats;
  record.downlink_floats = comm.downlink_floats;
  record.bias_cosine = result.bias_cosine;
  record.bias_frobenius = result.bias_frobenius;
  if (result.solver) {
    record.solver = SolverDiagnostics{result.solver->final_cosine,
                                      result.solver->regularizer_similarity,
                                      result.solver->final_delta_norm, result.solver->steps_taken};
  }

  const Evaluation ev = evaluate_current();
  record.per_domain_accuracy = ev.per_domain_accuracy;
  record.average_accuracy = ev.average_accuracy;
  record.test_loss = ev.average_loss;
  last_aggregate_ = std::move(result);
  return record;
}

ExperimentResult Simulation::run() {
  const Evaluation initial = evaluate_current();
  ExperimentResult out;
  for (int t = 0; t < cfg_.rounds; ++t) out.records.push_back(run_round());
  out.summary = summarize(out.records, initial, to_json(cfg_));
  return out;
}

ExperimentResult run_experiment(const FedConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace lorafair
