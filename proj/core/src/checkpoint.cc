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

#include "poke/checkpoint.h"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "binary_io.h"
#include "poke/error.h"

namespace poke {
namespace {

using internal::ByteReader;
using internal::ByteWriter;

void WriteShape(ByteWriter& w, const std::vector<int>& shape) {
  w.U32(static_cast<uint32_t>(shape.size()));
  for (int d : shape) w.U32(static_cast<uint32_t>(d));
}

std::vector<int> ReadShape(ByteReader& r) {
  const uint32_t rank = r.U32();
  if (rank > 8) throw FormatError(fmt::format("implausible tensor rank {}", rank));
  std::vector<int> shape(rank);
  for (int& d : shape) {
    const uint32_t e = r.U32();
    if (e > (1u << 24)) throw FormatError("implausible tensor extent");
    d = static_cast<int>(e);
  }
  return shape;
}

}  // namespace

std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& checkpoint) {
  ByteWriter w;
  w.Raw(std::string_view(kCheckpointMagic, 4));
  w.U16(kCheckpointVersion);
  w.U32(static_cast<uint32_t>(checkpoint.layers.size()));
  for (const NamedLayer& layer : checkpoint.layers) {
    w.Str(layer.name);
    WriteShape(w, layer.params.weights.shape());
    WriteShape(w, layer.params.biases.shape());
  }
  w.U32(static_cast<uint32_t>(checkpoint.metadata.size()));
  for (const auto& [key, value] : checkpoint.metadata) {
    w.Str(key);
    w.Str(value);
  }
  for (const NamedLayer& layer : checkpoint.layers) {
    for (double v : layer.params.weights.values()) w.F64(v);
    for (double v : layer.params.biases.values()) w.F64(v);
  }
  return std::move(w.bytes());
}

Checkpoint DeserializeCheckpoint(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 6 || r.Raw(4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("not a checkpoint file: bad magic");
  }
  const uint16_t version = r.U16();
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("unsupported checkpoint version {}", version));
  }
  Checkpoint checkpoint;
  const uint32_t layer_count = r.U32();
  if (layer_count > 1024) throw FormatError("implausible layer count");
  std::vector<std::pair<std::vector<int>, std::vector<int>>> shapes;
  for (uint32_t i = 0; i < layer_count; ++i) {
    NamedLayer layer;
    layer.name = r.Str();
    std::vector<int> ws = ReadShape(r);
    std::vector<int> bs = ReadShape(r);
    shapes.emplace_back(std::move(ws), std::move(bs));
    checkpoint.layers.push_back(std::move(layer));
  }
  const uint32_t meta_count = r.U32();
  for (uint32_t i = 0; i < meta_count; ++i) {
    std::string key = r.Str();
    checkpoint.metadata[key] = r.Str();
  }
  size_t total = 0;
  for (const auto& [ws, bs] : shapes) total += ShapeSize(ws) + ShapeSize(bs);
  if (r.remaining() != total * 8) {
    throw FormatError(fmt::format(
        "checkpoint payload has {} bytes, architecture needs {}", r.remaining(),
        total * 8));
  }
  for (size_t i = 0; i < shapes.size(); ++i) {
    NdArray w(shapes[i].first);
    NdArray b(shapes[i].second);
    for (double& v : w.values()) v = r.F64();
    for (double& v : b.values()) v = r.F64();
    checkpoint.layers[i].params = LayerParams(std::move(w), std::move(b));
  }
  return checkpoint;
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = SerializeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot create '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("write failed on '{}'", path.string()));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes);
}

}  // namespace poke
