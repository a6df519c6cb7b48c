// Copyright 2026 The Poke Authors
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

#ifndef POKE_CONFIG_H_
#define POKE_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "poke/experiment.h"

namespace poke {

// Everything a command can be configured with. The experiment config owns
// the arena, training, planner and blob settings plus the work directory.
struct GlobalConfig {
  ExperimentConfig experiment;

  const ArenaParams& arena() const { return experiment.arena; }
};

struct ConfigKeyInfo {
  std::string key;
  std::string default_value;
  std::string help;
};

// All recognised keys with their default values.
std::vector<ConfigKeyInfo> ConfigKeys();

// Sets one key. Throws InvalidArgument for unknown keys and bad values.
void SetConfigValue(GlobalConfig& config, std::string_view key,
                    std::string_view value);

// Parses `key = value` lines; '#' starts a comment. `origin` names the
// source in error messages.
void ApplyConfigText(GlobalConfig& config, std::string_view text,
                     std::string_view origin = "<config>");
// Throws IoError if the file cannot be read.
void ApplyConfigFile(GlobalConfig& config, const std::filesystem::path& path);

// Effective configuration as `key = value` lines, in ConfigKeys() order.
// Feeding the lines back through ApplyConfigText reproduces the config.
std::vector<std::string> DescribeConfig(const GlobalConfig& config);

}  // namespace poke

#endif  // POKE_CONFIG_H_
