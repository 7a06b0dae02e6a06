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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lorafair/errors.hpp"
#include "lorafair/presets.hpp"

using namespace lorafair;

namespace {

FedConfig tiny() {
  FedConfig c;
  c.task.input_dim = 16;
  c.task.num_classes = 8;
  c.task.num_domains = 3;
  c.num_clients = 3;
  c.samples_per_client = 40;
  c.test_samples_per_domain = 30;
  c.rounds = 2;
  c.rank = 2;
  return c;
}

const SummaryRow& row_for(const PresetReport& r, const std::string& label) {
  for (const auto& row : r.rows) {
    if (row.label == label) return row;
  }
  throw std::runtime_error("missing label " + label);
}

}  // namespace

TEST_CASE("preset names round-trip") {
  CHECK(all_presets().size() == 7);
  for (Preset p : all_presets()) CHECK(parse_preset(preset_name(p)) == p);
  CHECK_THROWS_AS((void)parse_preset("everything"), ConfigError);
  CHECK(default_preset_seeds() == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("preset variants") {
  const FedConfig base = tiny();
  auto labels = [&](Preset p) {
    std::vector<std::string> out;
    for (const auto& v : preset_variants(p, base)) out.push_back(v.label);
    return out;
  };
  CHECK(labels(Preset::kChallenge2) ==
        std::vector<std::string>{"avg-initial", "re-initial", "local-initial"});
  CHECK(labels(Preset::kCompare) ==
        std::vector<std::string>{"fedit", "ffa-lora", "flora", "flexlora", "lora-fair"});
  CHECK(labels(Preset::kLambdaSweep) ==
        std::vector<std::string>{"lambda-0", "lambda-0.005", "lambda-0.01", "lambda-0.02"});
  CHECK(labels(Preset::kHetero) ==
        std::vector<std::string>{"hetlora", "flexlora", "lora-fair+hetlora"});
  for (const auto& v : preset_variants(Preset::kRankSweep, base)) {
    CHECK(v.config.task.num_classes >= 16);
    CHECK(v.config.rank <= 16);
  }
  for (const auto& v : preset_variants(Preset::kHetero, base)) {
    CHECK(v.config.client_ranks == std::vector<std::size_t>{2, 4, 4, 6, 6, 8});
  }
  const auto c1 = preset_variants(Preset::kChallenge1, base);
  CHECK(c1.front().config.rounds == 1);
  CHECK(c1.front().config.method == Method::kFedIt);
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS((void)median({}));
}

TEST_CASE("comm-cost preset reports the closed forms") {
  const PresetReport r = run_preset(Preset::kCommCost, tiny(), std::vector<std::uint64_t>{1}, {});
  const std::int64_t d = 8, l = 16, r_ = 2, k = 3;
  CHECK(row_for(r, "fedit").round_downlink_floats == r_ * (d + l));
  CHECK(row_for(r, "lora-fair").round_downlink_floats == r_ * (d + l));
  CHECK(row_for(r, "flexlora").round_downlink_floats == r_ * (d + l));
  CHECK(row_for(r, "ffa-lora").round_downlink_floats == r_ * d);
  CHECK(row_for(r, "flora").round_downlink_floats == k * r_ * (d + l));
  CHECK(row_for(r, "fedit").total_uplink_floats == 2 * k * r_ * (d + l));
  CHECK(row_for(r, "ffa-lora").total_uplink_floats == 2 * k * r_ * d);
  CHECK(row_for(r, "flora").total_downlink_floats == 2 * k * k * r_ * (d + l));
}

TEST_CASE("presets are deterministic and write their outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "lorafair_presets_test";
  std::filesystem::remove_all(dir);
  const std::vector<std::uint64_t> seeds{1, 2};
  const PresetReport a = run_preset(Preset::kCompare, tiny(), seeds, dir);
  const PresetReport b = run_preset(Preset::kCompare, tiny(), seeds, {});
  CHECK(summary_csv(a) == summary_csv(b));
  CHECK(a.rows.size() == 10);
  CHECK(std::filesystem::exists(dir / "compare" / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "compare" / "lora-fair_seed2.csv"));
  std::ifstream in(dir / "compare" / "summary.csv");
  std::stringstream s;
  s << in.rdbuf();
  CHECK(s.str() == summary_csv(a));
  CHECK(s.str().find("lora-fair,median,") != std::string::npos);
  CHECK_THROWS_AS((void)run_preset(Preset::kCompare, tiny(), std::vector<std::uint64_t>{}, {}),
                  ConfigError);
}

TEST_CASE("challenge1 compares both aggregation orders after one round") {
  const PresetReport r = run_preset(Preset::kChallenge1, tiny(), std::vector<std::uint64_t>{3}, {});
  CHECK(r.labels() == std::vector<std::string>{"mul-to-avg", "avg-to-mul"});
  const auto cfg = preset_variants(Preset::kChallenge1, tiny()).front().config;
  FedConfig c = cfg;
  c.seed = 3;
  const Challenge1Outcome o = run_challenge1(c);
  CHECK(r.median_test_loss("mul-to-avg") == o.mul_to_avg_loss);
  CHECK(r.median_test_loss("avg-to-mul") == o.avg_to_mul_loss);
}
