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

// Command-line front end: run, preset <name>, validate-config.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lorafair/config.hpp"
#include "lorafair/errors.hpp"
#include "lorafair/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

constexpr const char* kOutEnv = "LORAFAIR_OUT_DIR";

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::string out = "results";
  std::optional<std::string> method;
  std::optional<double> lambda;
  std::optional<std::size_t> rank;
  std::optional<int> rounds;
  std::string format = "both";
  std::string preset;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flat keys, see below)");
  cmd->add_option("--seed", f.seed, "root seed (overrides the config)");
  cmd->add_option("--seeds", f.seeds, "list of seeds to run")->delimiter(',');
  cmd->add_option("--out", f.out, "output directory (env " + std::string(kOutEnv) + " overrides)")
      ->capture_default_str();
  cmd->add_option("--method", f.method, "aggregation method");
  cmd->add_option("--lambda", f.lambda, "residual regularization weight");
  cmd->add_option("--rank", f.rank, "LoRA rank");
  cmd->add_option("--rounds", f.rounds, "communication rounds");
}

lorafair::FedConfig resolve_config(const Flags& f) {
  using nlohmann::json;
  lorafair::FedConfig cfg =
      f.config_path.empty() ? lorafair::FedConfig{} : lorafair::parse_config_file(f.config_path);
  json over = json::object();
  if (f.seed) over["seed"] = *f.seed;
  if (f.method) over["method"] = *f.method;
  if (f.lambda) over["lambda"] = *f.lambda;
  if (f.rank) over["rank"] = *f.rank;
  if (f.rounds) over["rounds"] = *f.rounds;
  return lorafair::apply_json(cfg, over);
}

std::filesystem::path output_dir(const Flags& f) {
  if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') return env;
  return f.out;
}

std::vector<std::uint64_t> seed_list(const Flags& f, const lorafair::FedConfig& cfg,
                                     bool preset) {
  if (!f.seeds.empty()) return f.seeds;
  if (f.seed) return {*f.seed};
  return preset ? lorafair::default_preset_seeds() : std::vector<std::uint64_t>{cfg.seed};
}

int cmd_run(const Flags& f) {
  const lorafair::FedConfig cfg = resolve_config(f);
  const auto dir = output_dir(f) / "run";
  std::filesystem::create_directories(dir);
  lorafair::EmitFormat format = lorafair::EmitFormat::kBoth;
  if (f.format == "csv") format = lorafair::EmitFormat::kCsv;
  if (f.format == "json") format = lorafair::EmitFormat::kJson;
  for (std::uint64_t seed : seed_list(f, cfg, false)) {
    lorafair::FedConfig c = cfg;
    c.seed = seed;
    const auto result = lorafair::run_experiment(c);
    std::filesystem::path path =
        dir / (std::string(lorafair::method_name(c.method)) + "_seed" + std::to_string(seed));
    if (format == lorafair::EmitFormat::kCsv) path += ".csv";
    if (format == lorafair::EmitFormat::kJson) path += ".json";
    lorafair::emit(result.records, result.summary, path, format);
    std::cout << lorafair::method_name(c.method) << " seed " << seed << ": final average accuracy "
              << lorafair::format_double(result.summary.final_average_accuracy) << "\n";
  }
  return kExitOk;
}

int cmd_preset(const Flags& f) {
  const lorafair::Preset preset = lorafair::parse_preset(f.preset);
  const lorafair::FedConfig cfg = resolve_config(f);
  const auto seeds = seed_list(f, cfg, true);
  const auto report = lorafair::run_preset(preset, cfg, seeds, output_dir(f));
  for (const auto& label : report.labels()) {
    std::cout << label << ": median final accuracy "
              << lorafair::format_double(report.median_accuracy(label)) << ", median test loss "
              << lorafair::format_double(report.median_test_loss(label)) << "\n";
  }
  return kExitOk;
}

int cmd_validate(const Flags& f) {
  std::cout << lorafair::serialize_config(resolve_config(f));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated LoRA fine-tuning simulator"};
  app.require_subcommand(1);
  app.footer("Config keys (flat JSON object; flags override file values):\n" +
             lorafair::describe_config_keys());

  Flags flags;
  auto* run = app.add_subcommand("run", "run one experiment per seed");
  add_common(run, flags);
  run->add_option("--format", flags.format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  auto* preset = app.add_subcommand("preset", "run a preset experiment grid");
  preset->add_option("name", flags.preset, "challenge1 | challenge2 | compare | lambda-sweep | "
                                           "rank-sweep | hetero | comm-cost")
      ->required();
  add_common(preset, flags);

  auto* validate = app.add_subcommand("validate-config", "print the resolved canonical config");
  add_common(validate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(flags);
    if (preset->parsed()) return cmd_preset(flags);
    return cmd_validate(flags);
  } catch (const lorafair::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
