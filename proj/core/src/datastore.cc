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

#include "poke/datastore.h"

#include <cstring>
#include <iterator>
#include <numbers>

#include <fmt/format.h>

#include "binary_io.h"
#include "poke/error.h"

namespace poke {
namespace {

using internal::ByteReader;
using internal::ByteWriter;

// Kept out of line: GCC 11 at -O3 vectorizes adjacent calls into a plain
// copy and drops the rounding.
[[gnu::noinline]] double F(double v) {
  return static_cast<double>(static_cast<float>(v));
}

void WriteHeader(ByteWriter& w, const DatasetHeader& h) {
  w.Raw(std::string_view(kDatasetMagic, 4));
  w.U16(h.version);
  const ArenaParams& p = h.params;
  for (double v : {p.arena_size, p.rect_w, p.rect_h, p.k_t, p.k_r,
                   p.wall_margin, p.noise_std, p.l_min, p.l_max}) {
    w.F32(static_cast<float>(v));
  }
  w.U64(h.record_count);
  w.U64(h.seed);
}

DatasetHeader ParseHeader(ByteReader& r) {
  if (r.remaining() < kDatasetHeaderBytes) {
    throw FormatError("dataset truncated: header incomplete");
  }
  if (r.Raw(4) != std::string_view(kDatasetMagic, 4)) {
    throw FormatError("not a dataset file: bad magic");
  }
  DatasetHeader h;
  h.version = r.U16();
  if (h.version != kDatasetVersion) {
    throw FormatError(fmt::format("unsupported dataset version {}", h.version));
  }
  ArenaParams& p = h.params;
  for (double* v : {&p.arena_size, &p.rect_w, &p.rect_h, &p.k_t, &p.k_r,
                    &p.wall_margin, &p.noise_std, &p.l_min, &p.l_max}) {
    *v = r.F32();
  }
  h.record_count = r.U64();
  h.seed = r.U64();
  return h;
}

void WriteRecord(ByteWriter& w, const InteractionRecord& rec) {
  for (double v : {rec.pose_t.cx, rec.pose_t.cy, rec.pose_t.theta,
                   rec.poke.px, rec.poke.py, rec.poke.theta, rec.poke.length,
                   rec.poke.is_nopoke ? 1.0 : 0.0, rec.pose_t1.cx,
                   rec.pose_t1.cy, rec.pose_t1.theta}) {
    w.F32(static_cast<float>(v));
  }
}

InteractionRecord ParseRecord(ByteReader& r) {
  InteractionRecord rec;
  rec.pose_t = {r.F32(), r.F32(), r.F32()};
  rec.poke.px = r.F32();
  rec.poke.py = r.F32();
  rec.poke.theta = r.F32();
  rec.poke.length = r.F32();
  rec.poke.is_nopoke = r.F32() != 0.0f;
  rec.pose_t1 = {r.F32(), r.F32(), r.F32()};
  return rec;
}

std::vector<uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("read failed on '{}'", path.string()));
  return bytes;
}

}  // namespace

ArenaParams QuantizeParams(const ArenaParams& p) {
  return {F(p.arena_size), F(p.rect_w),      F(p.rect_h),
          F(p.k_t),        F(p.k_r),         F(p.wall_margin),
          F(p.noise_std),  F(p.l_min),       F(p.l_max)};
}

Pose QuantizePose(const Pose& pose) {
  // Rounding up to 2pi would break the [0, 2pi) orientation range.
  const double theta = F(pose.theta);
  return {F(pose.cx), F(pose.cy), theta >= 2.0 * std::numbers::pi ? 0.0 : theta};
}

Poke QuantizePoke(const Poke& poke) {
  return {F(poke.px), F(poke.py), F(poke.theta), F(poke.length),
          poke.is_nopoke};
}

Rng RecordNoiseRng(uint64_t seed, uint64_t index) {
  return Rng(HashIndex(seed ^ 0x6E6F697365ULL, index));
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path,
                             const ArenaParams& params, uint64_t seed)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError(fmt::format("cannot create '{}'", path.string()));
  header_.params = QuantizeParams(params);
  header_.seed = seed;
  ByteWriter w;
  WriteHeader(w, header_);
  out_.write(reinterpret_cast<const char*>(w.bytes().data()),
             static_cast<std::streamsize>(w.bytes().size()));
}

DatasetWriter::~DatasetWriter() {
  if (!closed_) {
    try {
      Close();
    } catch (const Error&) {
      // Destructors must not throw; an explicit Close() reports the failure.
    }
  }
}

void DatasetWriter::Append(const InteractionRecord& record) {
  if (closed_) throw Error("append to closed dataset writer");
  ByteWriter w;
  WriteRecord(w, record);
  out_.write(reinterpret_cast<const char*>(w.bytes().data()),
             static_cast<std::streamsize>(w.bytes().size()));
  ++header_.record_count;
}

DatasetHeader DatasetWriter::Close() {
  if (closed_) return header_;
  closed_ = true;
  ByteWriter w;
  WriteHeader(w, header_);
  out_.seekp(0);
  out_.write(reinterpret_cast<const char*>(w.bytes().data()),
             static_cast<std::streamsize>(w.bytes().size()));
  out_.close();
  if (!out_) throw IoError(fmt::format("write failed on '{}'", path_.string()));
  return header_;
}

DatasetReader::DatasetReader(const std::filesystem::path& path)
    : bytes_(ReadFile(path)) {
  ByteReader r(bytes_);
  header_ = ParseHeader(r);
  const uint64_t expected =
      kDatasetHeaderBytes + header_.record_count * kDatasetRecordBytes;
  if (bytes_.size() != expected) {
    throw FormatError(fmt::format(
        "dataset size mismatch: header claims {} records ({} bytes), file has "
        "{} bytes",
        header_.record_count, expected, bytes_.size()));
  }
}

InteractionRecord DatasetReader::Read(uint64_t index) const {
  if (index >= header_.record_count) {
    throw OutOfRange(fmt::format("record index {} out of range [0, {})", index,
                                 header_.record_count));
  }
  ByteReader r(std::span<const uint8_t>(bytes_).subspan(
      kDatasetHeaderBytes + index * kDatasetRecordBytes, kDatasetRecordBytes));
  return ParseRecord(r);
}

std::vector<InteractionRecord> DatasetReader::ReadAll() const {
  std::vector<InteractionRecord> records;
  records.reserve(header_.record_count);
  for (uint64_t i = 0; i < header_.record_count; ++i) records.push_back(Read(i));
  return records;
}

InteractionRecord ReadRecord(const std::filesystem::path& path,
                             uint64_t index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<uint8_t> head(kDatasetHeaderBytes);
  in.read(reinterpret_cast<char*>(head.data()),
          static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<size_t>(in.gcount()));
  ByteReader hr(head);
  const DatasetHeader header = ParseHeader(hr);
  if (index >= header.record_count) {
    throw OutOfRange(fmt::format("record index {} out of range [0, {})", index,
                                 header.record_count));
  }
  std::vector<uint8_t> rec(kDatasetRecordBytes);
  in.seekg(static_cast<std::streamoff>(kDatasetHeaderBytes +
                                       index * kDatasetRecordBytes));
  in.read(reinterpret_cast<char*>(rec.data()),
          static_cast<std::streamsize>(rec.size()));
  if (in.gcount() != static_cast<std::streamsize>(rec.size())) {
    throw FormatError("dataset truncated: record incomplete");
  }
  ByteReader rr(rec);
  return ParseRecord(rr);
}

DatasetHeader GenerateDataset(uint64_t n, uint64_t seed,
                              const ArenaParams& params,
                              const std::filesystem::path& path) {
  if (n == 0) throw InvalidArgument("dataset must contain at least one record");
  params.Validate();
  const ArenaParams stored = QuantizeParams(params);
  stored.Validate();

  DatasetWriter writer(path, stored, seed);
  Rng rng(seed);
  Pose pose;
  for (uint64_t i = 0; i < n; ++i) {
    if (i % kEpisodeLength == 0) pose = QuantizePose(RandomPose(stored, rng));
    InteractionRecord rec;
    rec.pose_t = pose;
    rec.poke = QuantizePoke(SampleRandomPoke(pose, stored, rng));
    Rng noise = RecordNoiseRng(seed, i);
    rec.pose_t1 = QuantizePose(Step(pose, rec.poke, stored, &noise));
    writer.Append(rec);
    pose = rec.pose_t1;
  }
  return writer.Close();
}

}  // namespace poke
