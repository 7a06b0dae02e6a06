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

// Drives the built command-line binary through a shell.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lorafair/config.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome shell(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + LORAFAIR_CLI_PATH + "' " + args +
                          " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Outcome o;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lorafair_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small enough for a run to finish in well under a second.
fs::path tiny_config(const fs::path& dir) {
  const fs::path p = dir / "tiny.json";
  std::ofstream(p) << R"({"input_dim": 12, "num_classes": 5, "num_domains": 3, "num_clients": 3,
    "samples_per_client": 40, "test_samples_per_domain": 20, "rounds": 2, "rank": 2})";
  return p;
}

}  // namespace

TEST_CASE("help lists every config key with its default") {
  const Outcome o = shell("--help");
  CHECK(o.status == 0);
  const auto defaults = lorafair::to_json(lorafair::FedConfig{});
  for (const auto& k : lorafair::config_keys()) {
    INFO("key " << k.name);
    CHECK(o.out.find("  " + k.name + " ") != std::string::npos);
    CHECK(o.out.find("(default " + defaults.at(k.name).dump() + ")") != std::string::npos);
  }
  CHECK(o.out.find(lorafair::describe_config_keys()) != std::string::npos);
  for (const char* sub : {"run", "preset", "validate-config"}) {
    CHECK(o.out.find(sub) != std::string::npos);
  }
  CHECK(defaults.size() == lorafair::config_keys().size());
}

TEST_CASE("subcommand help lists the flags") {
  const Outcome o = shell("run --help");
  CHECK(o.status == 0);
  for (const char* flag : {"--config", "--seed", "--seeds", "--out", "--method", "--lambda",
                           "--rank", "--rounds"}) {
    CHECK(o.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("usage and config errors exit with 1") {
  CHECK(shell("").status == 1);
  CHECK(shell("frobnicate").status == 1);
  CHECK(shell("run --no-such-flag").status == 1);
  CHECK(shell("validate-config --rank 999").status == 1);
  CHECK(shell("validate-config --method fedavg").status == 1);
  CHECK(shell("validate-config --config /nonexistent/lorafair.json").status == 1);
  CHECK(shell("preset everything").status == 1);
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << "{\n  \"rank\": 2,\n  oops\n}\n";
  const Outcome o = shell("validate-config --config '" + (dir / "bad.json").string() + "'");
  CHECK(o.status == 1);
  CHECK(o.out.find("line 3") != std::string::npos);
}

TEST_CASE("validate-config prints the canonical config with overrides") {
  const fs::path dir = scratch("validate");
  const Outcome o = shell("validate-config --config '" + tiny_config(dir).string() +
                          "' --rank 3 --lambda 0.02 --method fedit --rounds 9 --seed 17");
  REQUIRE(o.status == 0);
  const auto cfg = lorafair::parse_config_text(o.out);
  CHECK(cfg.rank == 3);
  CHECK(cfg.solver.lambda == 0.02);
  CHECK(cfg.method == lorafair::Method::kFedIt);
  CHECK(cfg.rounds == 9);
  CHECK(cfg.seed == 17);
  CHECK(cfg.task.input_dim == 12);
  CHECK(o.out == lorafair::serialize_config(cfg));
  CHECK(shell("validate-config").out == lorafair::serialize_config(lorafair::FedConfig{}));
}

TEST_CASE("run writes per-seed outputs and reruns are byte-identical") {
  const fs::path dir = scratch("run");
  const std::string cfg = "--config '" + tiny_config(dir).string() + "'";
  const Outcome a = shell("run " + cfg + " --seeds 1,2 --out '" + (dir / "a").string() + "'");
  REQUIRE(a.status == 0);
  const Outcome b = shell("run " + cfg + " --seeds 1,2 --out '" + (dir / "b").string() + "'");
  REQUIRE(b.status == 0);
  for (const char* f : {"lora-fair_seed1.csv", "lora-fair_seed2.csv"}) {
    REQUIRE(fs::exists(dir / "a" / "run" / f));
    CHECK(slurp(dir / "a" / "run" / f) == slurp(dir / "b" / "run" / f));
  }
  CHECK(fs::exists(dir / "a" / "run" / "lora-fair_seed1.json"));
  CHECK(slurp(dir / "a" / "run" / "lora-fair_seed1.csv") !=
        slurp(dir / "a" / "run" / "lora-fair_seed2.csv"));

  const Outcome c = shell("run " + cfg + " --format csv --method fedit --seed 5 --out '" +
                          (dir / "c").string() + "'");
  REQUIRE(c.status == 0);
  CHECK(fs::exists(dir / "c" / "run" / "fedit_seed5.csv"));
  CHECK_FALSE(fs::exists(dir / "c" / "run" / "fedit_seed5.json"));
}

TEST_CASE("the environment overrides the output directory") {
  const fs::path dir = scratch("env");
  const Outcome o = shell("run --config '" + tiny_config(dir).string() + "' --out '" +
                              (dir / "flag").string() + "'",
                          "LORAFAIR_OUT_DIR='" + (dir / "env").string() + "'");
  REQUIRE(o.status == 0);
  CHECK(fs::exists(dir / "env" / "run" / "lora-fair_seed1.csv"));
  CHECK_FALSE(fs::exists(dir / "flag"));
}

TEST_CASE("presets write a summary") {
  const fs::path dir = scratch("preset");
  const Outcome o = shell("preset comm-cost --config '" + tiny_config(dir).string() +
                          "' --seeds 1,2 --out '" + dir.string() + "'");
  REQUIRE(o.status == 0);
  CHECK(fs::exists(dir / "comm-cost" / "summary.csv"));
  CHECK(fs::exists(dir / "comm-cost" / "flora_seed2.csv"));
  CHECK(o.out.find("ffa-lora: median final accuracy") != std::string::npos);
}

TEST_CASE("runtime failures exit with 2") {
  const fs::path dir = scratch("runtime");
  std::ofstream(dir / "occupied") << "not a directory";
  const Outcome o = shell("run --config '" + tiny_config(dir).string() + "' --out '" +
                          (dir / "occupied").string() + "'");
  CHECK(o.status == 2);
}
