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

#ifndef POKE_CHECKPOINT_H_
#define POKE_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "poke/layers.h"

namespace poke {

// Layout (little-endian):
//   "POKM" | u16 version
//   u32 layer_count, then per layer:
//     u32 name_len, name bytes
//     u32 weight_rank, weight_rank x u32 extents
//     u32 bias_rank,   bias_rank x u32 extents
//   u32 metadata_count, then per entry: u32 len, key, u32 len, value
//   per layer in order: weights then biases as f64
inline constexpr char kCheckpointMagic[4] = {'P', 'O', 'K', 'M'};
inline constexpr uint16_t kCheckpointVersion = 1;

struct NamedLayer {
  std::string name;
  LayerParams params;  // gradients are not stored
};

struct Checkpoint {
  std::vector<NamedLayer> layers;
  std::map<std::string, std::string> metadata;
};

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DeserializeCheckpoint(const std::vector<uint8_t>& bytes);

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace poke

#endif  // POKE_CHECKPOINT_H_
