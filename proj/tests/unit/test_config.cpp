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
#include <string>

#include "doctest.h"
#include "lorafair/config.hpp"
#include "lorafair/errors.hpp"

using namespace lorafair;

namespace {

std::string error_of(const std::string& text) {
  try {
    (void)parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
  const std::string defaults = serialize_config(FedConfig{});
  CHECK(serialize_config(parse_config_text("")) == defaults);
  CHECK(serialize_config(parse_config_text(" \n\t\n")) == defaults);
  CHECK(serialize_config(parse_config_text("{}")) == defaults);
}

TEST_CASE("keys are listed alphabetically and match the serialized config") {
  const auto& keys = config_keys();
  REQUIRE_FALSE(keys.empty());
  for (std::size_t i = 1; i < keys.size(); ++i) CHECK(keys[i - 1].name < keys[i].name);
  const auto j = to_json(FedConfig{});
  CHECK(j.size() == keys.size());
  for (const auto& k : keys) {
    CHECK(j.contains(k.name));
    CHECK_FALSE(k.description.empty());
  }
}

TEST_CASE("values override the defaults") {
  const FedConfig c = parse_config_text(R"({
    "method": "flexlora", "rank": 8, "lambda": 0.005, "client_ranks": [2, 4, 8],
    "num_clients": 3, "init_policy": "local-initial", "partition": "feature-label",
    "solver_norm": "frobenius-squared", "solver_residual_position": "a", "seed": 42
  })");
  CHECK(c.method == Method::kFlexLora);
  CHECK(c.rank == 8);
  CHECK(c.solver.lambda == 0.005);
  CHECK(c.client_ranks == std::vector<std::size_t>{2, 4, 8});
  CHECK(c.init_policy == InitPolicy::kLocalInitial);
  CHECK(c.partition == Partition::kFeatureLabel);
  CHECK(c.solver.norm == RegularizerNorm::kFrobeniusSquared);
  CHECK(c.solver.residual_position == ResidualPosition::kOnA);
  CHECK(c.seed == 42);
}

TEST_CASE("serialization is canonical and round-trips") {
  const FedConfig c = parse_config_text(R"({"rounds": 7, "lambda": 0.1, "method": "fedit"})");
  const std::string text = serialize_config(c);
  CHECK(serialize_config(parse_config_text(text)) == text);
  CHECK(text.back() == '\n');
  // key order does not depend on input order
  CHECK(serialize_config(parse_config_text(R"({"method": "fedit", "lambda": 0.1, "rounds": 7})")) ==
        text);
}

TEST_CASE("an out-of-range rank names the invariant") {
  const std::string e = error_of(R"({"rank": 999})");
  CHECK(contains(e, "rank <= min(d,l)"));
  CHECK(contains(e, "999"));
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK(contains(error_of(R"({"rnak": 4})"), "unknown config key 'rnak'"));
  CHECK(contains(error_of(R"({"method": "fedavg"})"), "method"));
  CHECK(contains(error_of(R"({"rank": -1})"), "rank"));
  CHECK(contains(error_of(R"({"rank": 2.5})"), "rank"));
  CHECK(contains(error_of(R"({"lambda": "big"})"), "lambda"));
  CHECK(contains(error_of(R"({"solver_norm": "l1"})"), "solver_norm"));
  CHECK(contains(error_of(R"({"participation_fraction": 0})"), "participation_fraction"));
  CHECK(contains(error_of(R"({"method": "flora", "init_policy": "avg-initial"})"), "init_policy"));
  CHECK(contains(error_of("[1, 2]"), "JSON object"));
}

TEST_CASE("parse errors report the line") {
  const std::string e = error_of("{\n  \"rank\": 4,\n  \"rounds\" 5\n}\n");
  CHECK(contains(e, "line 3"));
  CHECK(contains(error_of("{\"rank\": 4,"), "line 1"));
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "lorafair_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ok.json") << R"({"rounds": 3})";
  CHECK(parse_config_file(dir / "ok.json").rounds == 3);
  std::ofstream(dir / "bad.json") << R"({"rounds": 3,})";
  try {
    (void)parse_config_file(dir / "bad.json");
    FAIL("bad file accepted");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "bad.json"));
  }
  CHECK_THROWS_AS((void)parse_config_file(dir / "absent.json"), ConfigError);
}

TEST_CASE("apply_json layers overrides") {
  const FedConfig base = parse_config_text(R"({"rounds": 3, "rank": 2})");
  const FedConfig c = apply_json(base, {{"rank", 6}});
  CHECK(c.rounds == 3);
  CHECK(c.rank == 6);
  CHECK_THROWS_AS((void)apply_json(base, {{"rank", 0}}), ConfigError);
}

TEST_CASE("help text lists every key with its default") {
  const std::string help = describe_config_keys();
  const auto defaults = to_json(FedConfig{});
  for (const auto& k : config_keys()) {
    CHECK(contains(help, "  " + k.name + " "));
    CHECK(contains(help, "(default " + defaults.at(k.name).dump() + ")"));
  }
}
