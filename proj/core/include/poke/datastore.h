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

#ifndef POKE_DATASTORE_H_
#define POKE_DATASTORE_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "poke/sim2d.h"

namespace poke {

// On-disk layout (little-endian):
//   "POKD" | u16 version | 9 x f32 arena params | u64 record_count | u64 seed
// followed by record_count packed records of 11 x f32:
//   cx, cy, theta | px, py, poke_theta, length, is_nopoke | cx', cy', theta'
// The arena params are stored in declaration order of ArenaParams.
inline constexpr char kDatasetMagic[4] = {'P', 'O', 'K', 'D'};
inline constexpr uint16_t kDatasetVersion = 1;
inline constexpr size_t kDatasetHeaderBytes = 4 + 2 + 9 * 4 + 8 + 8;
inline constexpr size_t kDatasetRecordBytes = 11 * 4;
// Poses are re-randomized after this many chained pokes.
inline constexpr uint64_t kEpisodeLength = 20;

struct DatasetHeader {
  uint16_t version = kDatasetVersion;
  ArenaParams params;
  uint64_t record_count = 0;
  uint64_t seed = 0;

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct InteractionRecord {
  Pose pose_t;
  Poke poke;
  Pose pose_t1;

  friend bool operator==(const InteractionRecord&,
                         const InteractionRecord&) = default;
};

// Rounds every field to the nearest float, the precision stored on disk.
ArenaParams QuantizeParams(const ArenaParams& params);
Pose QuantizePose(const Pose& pose);
Poke QuantizePoke(const Poke& poke);

// Noise stream used for the step of record `index`; identical at generation
// and verification time.
Rng RecordNoiseRng(uint64_t seed, uint64_t index);

class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, const ArenaParams& params,
                uint64_t seed);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void Append(const InteractionRecord& record);
  // Patches the record count into the header and flushes. Called by the
  // destructor if not called explicitly.
  DatasetHeader Close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  DatasetHeader header_;
  bool closed_ = false;
};

// Whole-file, read-only view; safe to share between threads.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& path);

  const DatasetHeader& header() const { return header_; }
  uint64_t size() const { return header_.record_count; }
  InteractionRecord Read(uint64_t index) const;
  std::vector<InteractionRecord> ReadAll() const;

 private:
  DatasetHeader header_;
  std::vector<uint8_t> bytes_;
};

InteractionRecord ReadRecord(const std::filesystem::path& path, uint64_t index);

// Generates n chained interaction records: random_pose, then repeatedly
// sample_random_poke and step, re-randomizing every kEpisodeLength records.
DatasetHeader GenerateDataset(uint64_t n, uint64_t seed,
                              const ArenaParams& params,
                              const std::filesystem::path& path);

}  // namespace poke

#endif  // POKE_DATASTORE_H_
