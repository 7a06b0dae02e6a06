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

#include "lorafair/presets.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lorafair/errors.hpp"

namespace lorafair {
namespace {

constexpr std::array kPresets = {Preset::kChallenge1, Preset::kChallenge2, Preset::kCompare,
                                 Preset::kLambdaSweep, Preset::kRankSweep,  Preset::kHetero,
                                 Preset::kCommCost};

std::string lambda_label(double lambda) {
  std::string s = format_double(lambda);
  return "lambda-" + s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> column(const PresetReport& r, std::string_view label,
                           double SummaryRow::*field) {
  std::vector<double> v;
  for (const auto& row : r.rows) {
    if (row.label == label) v.push_back(row.*field);
  }
  if (v.empty()) throw std::invalid_argument("no rows for label '" + std::string(label) + "'");
  return v;
}

}  // namespace

std::string_view preset_name(Preset p) noexcept {
  switch (p) {
    case Preset::kChallenge1:
      return "challenge1";
    case Preset::kChallenge2:
      return "challenge2";
    case Preset::kCompare:
      return "compare";
    case Preset::kLambdaSweep:
      return "lambda-sweep";
    case Preset::kRankSweep:
      return "rank-sweep";
    case Preset::kHetero:
      return "hetero";
    case Preset::kCommCost:
      return "comm-cost";
  }
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : kPresets) {
    if (preset_name(p) == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::span<const Preset> all_presets() noexcept { return kPresets; }

std::vector<std::uint64_t> default_preset_seeds() { return {1, 2, 3, 4, 5}; }

std::vector<PresetVariant> preset_variants(Preset preset, const FedConfig& base) {
  std::vector<PresetVariant> out;
  auto with_method = [&](Method m) {
    FedConfig c = base;
    c.method = m;
    c.init_policy = InitPolicy::kAuto;
    c.client_ranks.clear();
    return PresetVariant{std::string(method_name(m)), c};
  };
  switch (preset) {
    case Preset::kChallenge1: {
      FedConfig c = base;
      c.method = Method::kFedIt;
      c.init_policy = InitPolicy::kAuto;
      c.client_ranks.clear();
      c.rounds = 1;
      c.local_iters = 50;
      out.push_back({"mul-to-avg", c});
      out.push_back({"avg-to-mul", c});
      break;
    }
    case Preset::kChallenge2:
      for (InitPolicy p : {InitPolicy::kAvgInitial, InitPolicy::kReInitial, InitPolicy::kLocalInitial}) {
        FedConfig c = base;
        c.method = Method::kFedIt;
        c.init_policy = p;
        c.client_ranks.clear();
        out.push_back({std::string(policy_name(p)), c});
      }
      break;
    case Preset::kCompare:
    case Preset::kCommCost:
      for (Method m : {Method::kFedIt, Method::kFfaLora, Method::kFlora, Method::kFlexLora,
                       Method::kLoraFair}) {
        out.push_back(with_method(m));
      }
      break;
    case Preset::kLambdaSweep:
      for (double lambda : {0.0, 0.005, 0.01, 0.02}) {
        PresetVariant v = with_method(Method::kLoraFair);
        v.config.solver.lambda = lambda;
        v.label = lambda_label(lambda);
        out.push_back(std::move(v));
      }
      break;
    case Preset::kRankSweep:
      for (Method m : {Method::kFedIt, Method::kLoraFair}) {
        for (std::size_t r : {2, 4, 8, 16}) {
          PresetVariant v = with_method(m);
          v.config.rank = r;
          // rank 16 needs min(d, l) >= 16
          v.config.task.num_classes = std::max<std::size_t>(v.config.task.num_classes, 16);
          v.config.task.input_dim = std::max<std::size_t>(v.config.task.input_dim, 16);
          v.label += "-r" + std::to_string(r);
          out.push_back(std::move(v));
        }
      }
      break;
    case Preset::kHetero:
      for (Method m : {Method::kHetLora, Method::kFlexLora, Method::kLoraFairHetLora}) {
        PresetVariant v = with_method(m);
        v.config.num_clients = 6;
        v.config.client_ranks = {2, 4, 4, 6, 6, 8};
        v.config.rank = 8;
        out.push_back(std::move(v));
      }
      break;
  }
  for (auto& v : out) validate(v.config);
  return out;
}

std::vector<std::string> PresetReport::labels() const {
  std::vector<std::string> out;
  for (const auto& row : rows) {
    if (std::find(out.begin(), out.end(), row.label) == out.end()) out.push_back(row.label);
  }
  return out;
}

double PresetReport::median_accuracy(std::string_view label) const {
  return median(column(*this, label, &SummaryRow::final_average_accuracy));
}

double PresetReport::median_test_loss(std::string_view label) const {
  return median(column(*this, label, &SummaryRow::final_test_loss));
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Challenge1Outcome run_challenge1(const FedConfig& cfg) {
  Simulation sim(cfg);
  const Matrix base = sim.state().base.weights();
  sim.run_round();
  const AggregateResult& agg = *sim.last_aggregate();
  const Evaluation mul = evaluate_weights(add(base, agg.ideal_update), sim.test_sets());
  const Evaluation avg = evaluate_weights(add(base, agg.realized_update), sim.test_sets());
  return {mul.average_loss, avg.average_loss, mul.average_accuracy, avg.average_accuracy};
}

PresetReport run_preset(Preset preset, const FedConfig& base, std::span<const std::uint64_t> seeds,
                        const std::filesystem::path& out_dir) {
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  const auto variants = preset_variants(preset, base);
  const bool write = !out_dir.empty();
  const std::filesystem::path dir = out_dir / std::string(preset_name(preset));
  if (write) std::filesystem::create_directories(dir);

  PresetReport report;
  report.preset = preset;
  if (preset == Preset::kChallenge1) {
    // Both labels come from the same round, so each seed is simulated once.
    std::vector<SummaryRow> mul_rows;
    std::vector<SummaryRow> avg_rows;
    std::ostringstream csv;
    csv << "seed,mul_to_avg_loss,avg_to_mul_loss,mul_to_avg_accuracy,avg_to_mul_accuracy\n";
    for (std::uint64_t seed : seeds) {
      FedConfig c = variants.front().config;
      c.seed = seed;
      const Challenge1Outcome o = run_challenge1(c);
      mul_rows.push_back({"mul-to-avg", seed, o.mul_to_avg_accuracy, o.mul_to_avg_loss, 0, 0, 0});
      avg_rows.push_back({"avg-to-mul", seed, o.avg_to_mul_accuracy, o.avg_to_mul_loss, 0, 0, 0});
      csv << seed << ',' << format_double(o.mul_to_avg_loss) << ','
          << format_double(o.avg_to_mul_loss) << ',' << format_double(o.mul_to_avg_accuracy) << ','
          << format_double(o.avg_to_mul_accuracy) << '\n';
    }
    report.rows = mul_rows;
    report.rows.insert(report.rows.end(), avg_rows.begin(), avg_rows.end());
    if (write) write_text(dir / "challenge1.csv", csv.str());
  } else {
    for (const auto& v : variants) {
      for (std::uint64_t seed : seeds) {
        FedConfig c = v.config;
        c.seed = seed;
        const ExperimentResult r = run_experiment(c);
        if (write) {
          write_csv(r.records, c.task.num_domains,
                    dir / (v.label + "_seed" + std::to_string(seed) + ".csv"));
        }
        SummaryRow row{v.label, seed, r.summary.final_average_accuracy, r.summary.final_test_loss,
                       r.summary.total_uplink_floats, r.summary.total_downlink_floats, 0};
        if (!r.records.empty()) row.round_downlink_floats = r.records.back().downlink_floats;
        report.rows.push_back(std::move(row));
      }
    }
  }
  if (write) write_text(dir / "summary.csv", summary_csv(report));
  return report;
}

std::string summary_csv(const PresetReport& report) {
  std::ostringstream out;
  out << "label,seed,final_average_accuracy,final_test_loss,total_uplink_floats,"
         "total_downlink_floats,round_downlink_floats\n";
  for (const auto& r : report.rows) {
    out << r.label << ',' << r.seed << ',' << format_double(r.final_average_accuracy) << ','
        << format_double(r.final_test_loss) << ',' << r.total_uplink_floats << ','
        << r.total_downlink_floats << ',' << r.round_downlink_floats << '\n';
  }
  for (const auto& label : report.labels()) {
    out << label << ",median," << format_double(report.median_accuracy(label)) << ','
        << format_double(report.median_test_loss(label)) << ",,,\n";
  }
  return out.str();
}

}  // namespace lorafair
