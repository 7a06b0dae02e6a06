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

#include "lorafair/config.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>

#include "lorafair/errors.hpp"

namespace lorafair {
namespace {

using nlohmann::json;

struct KeySpec {
  ConfigKey key;
  std::function<json(const FedConfig&)> get;
  std::function<void(FedConfig&, const json&)> set;
};

[[noreturn]] void type_error(const std::string& key, const char* expected, const json& v) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got " + v.dump());
}

std::size_t as_count(const std::string& key, const json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    type_error(key, "a non-negative integer", v);
  }
  return v.get<std::size_t>();
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) type_error(key, "an integer", v);
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    type_error(key, "an integer in int range", v);
  }
  return static_cast<int>(x);
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) type_error(key, "a number", v);
  return v.get<double>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) type_error(key, "a string", v);
  return v.get<std::string>();
}

std::string_view position_name(ResidualPosition p) { return p == ResidualPosition::kOnB ? "b" : "a"; }

std::string_view norm_name(RegularizerNorm n) {
  return n == RegularizerNorm::kFrobenius ? "frobenius" : "frobenius-squared";
}

#define LF_COUNT(name, field, desc)                                       \
  KeySpec{{name, desc},                                                   \
          [](const FedConfig& c) { return json(c.field); },               \
          [](FedConfig& c, const json& v) { c.field = as_count(name, v); }}
#define LF_INT(name, field, desc)                                       \
  KeySpec{{name, desc},                                                 \
          [](const FedConfig& c) { return json(c.field); },             \
          [](FedConfig& c, const json& v) { c.field = as_int(name, v); }}
#define LF_DOUBLE(name, field, desc)                                       \
  KeySpec{{name, desc},                                                    \
          [](const FedConfig& c) { return json(c.field); },                \
          [](FedConfig& c, const json& v) { c.field = as_double(name, v); }}

const std::vector<KeySpec>& specs() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t = {
        LF_COUNT("batch_size", batch_size, "mini-batch size for local SGD"),
        LF_DOUBLE("base_scale", task.base_scale, "logit scale of the pre-trained classifier"),
        KeySpec{{"client_ranks", "per-client LoRA ranks; empty means every client uses rank"},
                [](const FedConfig& c) { return json(c.client_ranks); },
                [](FedConfig& c, const json& v) {
                  if (!v.is_array()) type_error("client_ranks", "an array of integers", v);
                  c.client_ranks.clear();
                  for (const auto& e : v) c.client_ranks.push_back(as_count("client_ranks", e));
                }},
        LF_DOUBLE("dirichlet_alpha", dirichlet_alpha, "Dirichlet concentration of the label split"),
        LF_DOUBLE("domain_shift", task.domain_shift, "strength of the per-domain input rotation"),
        KeySpec{{"init_policy", "auto | avg-initial | re-initial | local-initial"},
                [](const FedConfig& c) { return json(std::string(policy_name(c.init_policy))); },
                [](FedConfig& c, const json& v) {
                  c.init_policy = parse_policy(as_string("init_policy", v));
                }},
        LF_DOUBLE("init_std", init_std, "standard deviation of the Gaussian A initialization"),
        LF_COUNT("input_dim", task.input_dim, "input dimension l"),
        LF_DOUBLE("lambda", solver.lambda, "residual regularization weight"),
        LF_DOUBLE("learning_rate", learning_rate, "client SGD learning rate"),
        LF_INT("local_iters", local_iters, "local SGD steps per client per round"),
        KeySpec{{"method", "fedit | ffa-lora | flora | flexlora | hetlora | lora-fair | lora-fair+hetlora"},
                [](const FedConfig& c) { return json(std::string(method_name(c.method))); },
                [](FedConfig& c, const json& v) {
                  try {
                    c.method = parse_method(as_string("method", v));
                  } catch (const UnsupportedMethodError& e) {
                    throw ConfigError(std::string("config key 'method': ") + e.what());
                  }
                }},
        LF_DOUBLE("noise_std", task.noise_std, "per-coordinate input noise"),
        LF_COUNT("num_classes", task.num_classes, "number of classes d"),
        LF_COUNT("num_clients", num_clients, "number of clients K"),
        LF_COUNT("num_domains", task.num_domains, "number of feature domains"),
        LF_DOUBLE("participation_fraction", participation_fraction,
                  "fraction of clients sampled each round"),
        KeySpec{{"partition", "feature | feature-label"},
                [](const FedConfig& c) { return json(std::string(partition_name(c.partition))); },
                [](FedConfig& c, const json& v) {
                  c.partition = parse_partition(as_string("partition", v));
                }},
        LF_COUNT("rank", rank, "LoRA rank r"),
        LF_INT("rounds", rounds, "communication rounds"),
        LF_COUNT("samples_per_client", samples_per_client, "mean training samples per client"),
        KeySpec{{"seed", "root seed"},
                [](const FedConfig& c) { return json(c.seed); },
                [](FedConfig& c, const json& v) {
                  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
                    type_error("seed", "a non-negative integer", v);
                  }
                  c.seed = v.get<std::uint64_t>();
                }},
        LF_DOUBLE("solver_grad_tol", solver.grad_tol, "residual solver gradient-norm stop"),
        LF_DOUBLE("solver_learning_rate", solver.learning_rate, "residual solver initial step"),
        LF_DOUBLE("source_gap", task.source_gap,
                  "size of the rank-limited gap between source and target class means"),
        LF_COUNT("source_gap_rank", task.source_gap_rank, "rank of the source/target gap"),
        LF_INT("solver_max_steps", solver.max_steps, "residual solver step budget; 0 disables it"),
        KeySpec{{"solver_norm", "frobenius | frobenius-squared"},
                [](const FedConfig& c) { return json(std::string(norm_name(c.solver.norm))); },
                [](FedConfig& c, const json& v) {
                  const auto s = as_string("solver_norm", v);
                  if (s == "frobenius") {
                    c.solver.norm = RegularizerNorm::kFrobenius;
                  } else if (s == "frobenius-squared") {
                    c.solver.norm = RegularizerNorm::kFrobeniusSquared;
                  } else {
                    throw ConfigError("config key 'solver_norm': unknown value '" + s + "'");
                  }
                }},
        KeySpec{{"solver_residual_position", "b | a (factor that receives the residual)"},
                [](const FedConfig& c) {
                  return json(std::string(position_name(c.solver.residual_position)));
                },
                [](FedConfig& c, const json& v) {
                  const auto s = as_string("solver_residual_position", v);
                  if (s == "b") {
                    c.solver.residual_position = ResidualPosition::kOnB;
                  } else if (s == "a") {
                    c.solver.residual_position = ResidualPosition::kOnA;
                  } else {
                    throw ConfigError("config key 'solver_residual_position': unknown value '" + s + "'");
                  }
                }},
        LF_COUNT("test_samples_per_domain", test_samples_per_domain, "held-out samples per domain"),
    };
    std::sort(t.begin(), t.end(),
              [](const KeySpec& a, const KeySpec& b) { return a.key.name < b.key.name; });
    return t;
  }();
  return table;
}

#undef LF_COUNT
#undef LF_INT
#undef LF_DOUBLE

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& s : specs()) out.push_back(s.key);
    return out;
  }();
  return keys;
}

nlohmann::json to_json(const FedConfig& cfg) {
  json j = json::object();
  for (const auto& s : specs()) j[s.key.name] = s.get(cfg);
  return j;
}

FedConfig apply_json(const FedConfig& base, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object, got " + std::string(j.type_name()));
  FedConfig cfg = base;
  for (const auto& [name, value] : j.items()) {
    auto it = std::find_if(specs().begin(), specs().end(),
                           [&](const KeySpec& s) { return s.key.name == name; });
    if (it == specs().end()) throw ConfigError("unknown config key '" + name + "'");
    it->set(cfg, value);
  }
  validate(cfg);
  return cfg;
}

FedConfig parse_config_text(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    FedConfig cfg;
    validate(cfg);
    return cfg;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(line_of(text, e.byte)) + ": " +
                      e.what());
  }
  return apply_json(FedConfig{}, j);
}

FedConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const FedConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string describe_config_keys() {
  const json defaults = to_json(FedConfig{});
  std::size_t width = 0;
  for (const auto& k : config_keys()) width = std::max(width, k.name.size());
  std::ostringstream out;
  for (const auto& k : config_keys()) {
    const std::string def = defaults.at(k.name).dump();
    out << "  " << k.name << std::string(width - k.name.size() + 2, ' ') << "(default " << def
        << ")  " << k.description << "\n";
  }
  return out.str();
}

}  // namespace lorafair
