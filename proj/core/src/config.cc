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

#include "poke/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "poke/error.h"

namespace poke {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseValue(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InvalidArgument(
        fmt::format("config key '{}': cannot parse '{}'", key, text));
  }
  return value;
}

template <>
bool ParseValue<bool>(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgument(
      fmt::format("config key '{}': expected true/false, got '{}'", key, text));
}

template <typename T>
std::string FormatValue(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else {
    return fmt::format("{}", v);
  }
}

std::vector<std::string_view> SplitList(std::string_view text) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = text.find(',');
    items.push_back(Trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return items;
}

struct Entry {
  std::string key;
  std::string help;
  std::function<std::string(const GlobalConfig&)> get;
  std::function<void(GlobalConfig&, std::string_view)> set;
};

template <typename T, typename Field>
Entry Scalar(std::string key, std::string help, Field field) {
  Entry e;
  e.key = key;
  e.help = std::move(help);
  e.get = [field](const GlobalConfig& c) {
    return FormatValue(field(const_cast<GlobalConfig&>(c)));
  };
  e.set = [field, key](GlobalConfig& c, std::string_view v) {
    field(c) = ParseValue<T>(key, v);
  };
  return e;
}

const std::vector<Entry>& Entries() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> t;
    // clang-format off
    t.push_back(Scalar<double>("arena.size", "arena side length in pixels (image is size x size)",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.arena_size; }));
    t.push_back(Scalar<double>("arena.rect_w", "object long side (pixels)",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.rect_w; }));
    t.push_back(Scalar<double>("arena.rect_h", "object short side (pixels)",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.rect_h; }));
    t.push_back(Scalar<double>("arena.k_t", "translation gain per pixel of push",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.k_t; }));
    t.push_back(Scalar<double>("arena.k_r", "rotation gain per pixel of push at unit lever",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.k_r; }));
    t.push_back(Scalar<double>("arena.wall_margin", "gap between arena edge and walls",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.wall_margin; }));
    t.push_back(Scalar<double>("arena.noise_std", "std of outcome noise (pixels)",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.noise_std; }));
    t.push_back(Scalar<double>("arena.l_min", "shortest poke",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.l_min; }));
    t.push_back(Scalar<double>("arena.l_max", "longest poke",
        [](GlobalConfig& c) -> double& { return c.experiment.arena.l_max; }));

    t.push_back(Scalar<double>("train.lambda", "forward loss weight",
        [](GlobalConfig& c) -> double& { return c.experiment.train.lambda; }));
    t.push_back(Scalar<int>("train.batch_size", "minibatch size",
        [](GlobalConfig& c) -> int& { return c.experiment.train.batch_size; }));
    t.push_back(Scalar<int>("train.epochs", "passes over the training split",
        [](GlobalConfig& c) -> int& { return c.experiment.train.epochs; }));
    t.push_back(Scalar<double>("train.learning_rate", "Adam step size",
        [](GlobalConfig& c) -> double& { return c.experiment.train.learning_rate; }));
    t.push_back(Scalar<uint64_t>("train.seed", "initialisation and shuffling seed",
        [](GlobalConfig& c) -> uint64_t& { return c.experiment.train.seed; }));
    t.push_back(Scalar<double>("train.inverse_weight", "inverse loss weight",
        [](GlobalConfig& c) -> double& { return c.experiment.train.inverse_weight; }));
    t.push_back(Scalar<bool>("train.detach_target", "stop gradients through the forward target latent",
        [](GlobalConfig& c) -> bool& { return c.experiment.train.detach_target; }));
    t.push_back(Scalar<int64_t>("train.max_steps", "optimizer step limit (0 = none)",
        [](GlobalConfig& c) -> int64_t& { return c.experiment.train.max_steps; }));

    t.push_back(Scalar<int>("planner.max_pokes", "poke budget per episode",
        [](GlobalConfig& c) -> int& { return c.experiment.planner.max_pokes; }));
    t.push_back(Scalar<bool>("planner.sample", "sample actions instead of argmax",
        [](GlobalConfig& c) -> bool& { return c.experiment.planner.sample; }));
    t.push_back(Scalar<double>("planner.temperature", "softmax temperature when sampling",
        [](GlobalConfig& c) -> double& { return c.experiment.planner.temperature; }));
    t.push_back(Scalar<uint64_t>("planner.seed", "action sampling seed",
        [](GlobalConfig& c) -> uint64_t& { return c.experiment.planner.seed; }));

    t.push_back(Scalar<double>("blob.threshold", "stop distance between centroids (pixels)",
        [](GlobalConfig& c) -> double& { return c.experiment.blob.threshold; }));
    t.push_back(Scalar<double>("blob.len_gain", "poke length per pixel of centroid distance",
        [](GlobalConfig& c) -> double& { return c.experiment.blob.len_gain; }));
    t.push_back(Scalar<int>("blob.max_pokes", "poke budget per episode",
        [](GlobalConfig& c) -> int& { return c.experiment.blob.max_pokes; }));

    {
      Entry e;
      e.key = "experiment.sizes";
      e.help = "comma-separated training set sizes";
      e.get = [](const GlobalConfig& c) {
        return fmt::format("{}", fmt::join(c.experiment.sizes, ","));
      };
      e.set = [](GlobalConfig& c, std::string_view v) {
        std::vector<uint64_t> sizes;
        for (std::string_view item : SplitList(v)) {
          sizes.push_back(ParseValue<uint64_t>("experiment.sizes", item));
        }
        c.experiment.sizes = std::move(sizes);
      };
      t.push_back(std::move(e));
    }
    {
      Entry e;
      e.key = "experiment.models";
      e.help = "comma-separated subset of joint,inverse,blob";
      e.get = [](const GlobalConfig& c) {
        return fmt::format("{}", fmt::join(c.experiment.models, ","));
      };
      e.set = [](GlobalConfig& c, std::string_view v) {
        std::vector<std::string> models;
        for (std::string_view item : SplitList(v)) {
          if (item != kJointModel && item != kInverseModel && item != kBlobModel) {
            throw InvalidArgument(fmt::format(
                "config key 'experiment.models': unknown model '{}'", item));
          }
          models.emplace_back(item);
        }
        c.experiment.models = std::move(models);
      };
      t.push_back(std::move(e));
    }
    t.push_back(Scalar<int>("experiment.episodes", "paired episodes per cell",
        [](GlobalConfig& c) -> int& { return c.experiment.episodes; }));
    t.push_back(Scalar<uint64_t>("experiment.seed", "episode seed",
        [](GlobalConfig& c) -> uint64_t& { return c.experiment.seed; }));
    t.push_back(Scalar<uint64_t>("experiment.data_seed", "dataset generation seed",
        [](GlobalConfig& c) -> uint64_t& { return c.experiment.data_seed; }));
    t.push_back(Scalar<double>("experiment.min_goal_distance", "minimum init-goal center distance",
        [](GlobalConfig& c) -> double& { return c.experiment.min_goal_distance; }));
    t.push_back(Scalar<bool>("experiment.train_inline", "generate data and train missing checkpoints",
        [](GlobalConfig& c) -> bool& { return c.experiment.train_inline; }));
    {
      Entry e;
      e.key = "paths.work_dir";
      e.help = "directory for datasets and checkpoints used by eval";
      e.get = [](const GlobalConfig& c) { return c.experiment.work_dir.string(); };
      e.set = [](GlobalConfig& c, std::string_view v) {
        if (v.empty()) throw InvalidArgument("config key 'paths.work_dir' is empty");
        c.experiment.work_dir = std::string(v);
      };
      t.push_back(std::move(e));
    }
    t.push_back(Scalar<int>("jobs", "worker threads for training and episodes",
        [](GlobalConfig& c) -> int& { return c.experiment.jobs; }));
    // clang-format on
    return t;
  }();
  return entries;
}

}  // namespace

std::vector<ConfigKeyInfo> ConfigKeys() {
  const GlobalConfig defaults;
  std::vector<ConfigKeyInfo> keys;
  for (const Entry& e : Entries()) {
    keys.push_back({e.key, e.get(defaults), e.help});
  }
  return keys;
}

void SetConfigValue(GlobalConfig& config, std::string_view key,
                    std::string_view value) {
  for (const Entry& e : Entries()) {
    if (e.key == key) {
      e.set(config, Trim(value));
      return;
    }
  }
  throw InvalidArgument(fmt::format("unknown config key '{}'", key));
}

void ApplyConfigText(GlobalConfig& config, std::string_view text,
                     std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument(
          fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string_view key = Trim(line.substr(0, eq));
    try {
      SetConfigValue(config, key, line.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
}

void ApplyConfigFile(GlobalConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ApplyConfigText(config, buffer.str(), path.string());
}

std::vector<std::string> DescribeConfig(const GlobalConfig& config) {
  std::vector<std::string> lines;
  for (const Entry& e : Entries()) {
    lines.push_back(fmt::format("{} = {}", e.key, e.get(config)));
  }
  return lines;
}

}  // namespace poke
