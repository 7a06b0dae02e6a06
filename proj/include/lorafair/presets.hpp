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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lorafair/fedsim.hpp"

namespace lorafair {

enum class Preset {
  kChallenge1,   ///< one-round fold of the average of products vs the product of averages
  kChallenge2,   ///< avg-initial vs re-initial vs local-initial under FedIT
  kCompare,      ///< all homogeneous-rank methods on one task
  kLambdaSweep,  ///< LoRA-FAIR over lambda {0, 0.005, 0.01, 0.02}
  kRankSweep,    ///< FedIT and LoRA-FAIR over rank {2, 4, 8, 16}
  kHetero,       ///< client ranks {2, 4, 4, 6, 6, 8}
  kCommCost,     ///< per-round uplink/downlink floats per method
};

std::string_view preset_name(Preset p) noexcept;
/// Throws ConfigError for an unknown name.
Preset parse_preset(std::string_view name);
std::span<const Preset> all_presets() noexcept;

std::vector<std::uint64_t> default_preset_seeds();

struct PresetVariant {
  std::string label;
  FedConfig config;
};

/// Configurations a preset runs for one seed. Preset-controlled fields
/// override `base`; everything else is taken from it.
std::vector<PresetVariant> preset_variants(Preset preset, const FedConfig& base);

struct SummaryRow {
  std::string label;
  std::uint64_t seed = 0;
  double final_average_accuracy = 0.0;
  double final_test_loss = 0.0;
  std::int64_t total_uplink_floats = 0;
  std::int64_t total_downlink_floats = 0;
  std::int64_t round_downlink_floats = 0;  ///< per client, last round
};

struct PresetReport {
  Preset preset = Preset::kCompare;
  std::vector<SummaryRow> rows;  ///< variant-major, seeds in the given order

  std::vector<std::string> labels() const;
  /// Median over seeds of the chosen column for one label.
  double median_accuracy(std::string_view label) const;
  double median_test_loss(std::string_view label) const;
};

/// Challenge-1 measurement for a single seed: after one round, test loss of
/// base + sum_k p_k B_k A_k versus base + B_bar A_bar.
struct Challenge1Outcome {
  double mul_to_avg_loss = 0.0;
  double avg_to_mul_loss = 0.0;
  double mul_to_avg_accuracy = 0.0;
  double avg_to_mul_accuracy = 0.0;
};
Challenge1Outcome run_challenge1(const FedConfig& cfg);

/// Runs every variant for every seed. When out_dir is non-empty, writes
/// <out_dir>/<preset>/<label>_seed<N>.csv and summary.csv (one row per
/// run followed by one median row per label). Output is a pure function
/// of (preset, base config, seeds).
PresetReport run_preset(Preset preset, const FedConfig& base, std::span<const std::uint64_t> seeds,
                        const std::filesystem::path& out_dir);

std::string summary_csv(const PresetReport& report);

double median(std::vector<double> values);

}  // namespace lorafair
