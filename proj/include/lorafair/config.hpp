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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lorafair/fedsim.hpp"

namespace lorafair {

// Experiment configuration files are flat JSON objects. Every key is
// optional; missing keys take the documented default and unknown keys are
// rejected.

struct ConfigKey {
  std::string name;
  std::string description;
};

/// Every recognised key in canonical (alphabetical) order.
const std::vector<ConfigKey>& config_keys();

/// Canonical form: every key present, alphabetical order.
nlohmann::json to_json(const FedConfig& cfg);

/// Applies the keys of `j` on top of `base`. Throws ConfigError naming the
/// offending key for unknown keys, wrong types, or violated invariants.
FedConfig apply_json(const FedConfig& base, const nlohmann::json& j);

/// Parses and validates a configuration document.
FedConfig parse_config_text(const std::string& text);
/// Reads and parses a configuration file. An empty file yields the defaults.
FedConfig parse_config_file(const std::filesystem::path& path);

/// Canonical text (two-space indented JSON with a trailing newline).
std::string serialize_config(const FedConfig& cfg);

/// "key  default  description" lines for --help.
std::string describe_config_keys();

}  // namespace lorafair
