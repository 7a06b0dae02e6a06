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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorafair/lora.hpp"
#include "lorafair/synthetic.hpp"
#include "json.hpp"

namespace lorafair {

struct SolverDiagnostics {
  double final_cosine = 0.0;
  double regularizer_similarity = 0.0;
  double delta_norm = 0.0;
  int steps = 0;
  friend bool operator==(const SolverDiagnostics&, const SolverDiagnostics&) = default;
};

struct RoundRecord {
  int round = 0;  ///< 1-based
  int participants = 0;
  std::vector<double> per_domain_accuracy;
  double average_accuracy = 0.0;
  double train_loss = 0.0;  ///< mean local loss over participants' last steps
  double test_loss = 0.0;   ///< mean of per-domain held-out cross-entropy
  std::int64_t uplink_floats = 0;
  std::int64_t downlink_floats = 0;  ///< per participating client
  double server_solve_seconds = 0.0;
  double client_train_seconds = 0.0;  ///< summed over participants
  double bias_cosine = 1.0;
  double bias_frobenius = 0.0;
  std::optional<SolverDiagnostics> solver;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct RunSummary {
  nlohmann::json config;  ///< canonical config echo
  int rounds = 0;
  std::vector<double> initial_per_domain_accuracy;
  double initial_average_accuracy = 0.0;
  std::vector<double> final_per_domain_accuracy;
  double final_average_accuracy = 0.0;
  double final_test_loss = 0.0;
  std::vector<double> accuracy_trajectory;  ///< average accuracy after each round
  std::int64_t total_uplink_floats = 0;
  std::int64_t total_downlink_floats = 0;  ///< summed over rounds and recipients
  double total_server_seconds = 0.0;
  double total_client_seconds = 0.0;
};

struct Evaluation {
  std::vector<double> per_domain_accuracy;
  std::vector<double> per_domain_loss;
  double average_accuracy = 0.0;
  double average_loss = 0.0;
};

/// Argmax accuracy and cross-entropy of W0 + B A on each domain's test set.
Evaluation evaluate(const FrozenBase& base, const LoraPair& pair,
                    std::span<const ClientDataset> test_sets);
/// Same for an explicit weight matrix.
Evaluation evaluate_weights(const Matrix& weights, std::span<const ClientDataset> test_sets);

/// Fixed CSV header for `num_domains` accuracy columns.
std::vector<std::string> csv_columns(std::size_t num_domains);

/// One row per record. Wall-clock fields are left out so the file is a pure
/// function of (config, seed); they are kept in the JSON document.
std::string records_to_csv(std::span<const RoundRecord> records, std::size_t num_domains);
void write_csv(std::span<const RoundRecord> records, std::size_t num_domains,
               const std::filesystem::path& path);
/// Parses a file written by write_csv. Timing fields come back as zero.
std::vector<RoundRecord> read_csv(const std::filesystem::path& path);

nlohmann::json to_json(const RoundRecord& record);
RoundRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunSummary& summary);
RunSummary summary_from_json(const nlohmann::json& j);

/// {"summary": ..., "records": [...]}
void write_json(std::span<const RoundRecord> records, const RunSummary& summary,
                const std::filesystem::path& path);

enum class EmitFormat { kCsv, kJson, kBoth };

/// Writes path (kCsv/kJson) or path with .csv and .json extensions (kBoth).
/// I/O failures throw std::runtime_error naming the path.
void emit(std::span<const RoundRecord> records, const RunSummary& summary,
          const std::filesystem::path& path, EmitFormat format);

/// Summary totals and trajectories derived from the records.
RunSummary summarize(std::span<const RoundRecord> records, const Evaluation& initial,
                     nlohmann::json config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace lorafair
