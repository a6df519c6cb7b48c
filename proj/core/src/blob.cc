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

#include "poke/blob.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "poke/error.h"

namespace poke {

void BlobConfig::Validate() const {
  if (!(threshold >= 0.0)) throw InvalidArgument("blob threshold must be >= 0");
  if (!(len_gain > 0.0)) throw InvalidArgument("blob len_gain must be positive");
  if (max_pokes < 1) throw InvalidArgument("max_pokes must be at least 1");
}

BlobEstimate DetectBlob(const Observation& image) {
  const int n = image.size();
  double sx = 0.0, sy = 0.0;
  int count = 0;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      if (image.at(row, col) > 0.5) {
        sx += col + 0.5;
        sy += row + 0.5;
        ++count;
      }
    }
  }
  if (count == 0) throw Error("blob detection failed: no foreground pixels");
  BlobEstimate blob;
  blob.pixel_count = count;
  blob.centroid = {sx / count, sy / count};

  double cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      if (image.at(row, col) > 0.5) {
        const double dx = col + 0.5 - blob.centroid.x;
        const double dy = row + 0.5 - blob.centroid.y;
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
      }
    }
  }
  // Orientation of the principal eigenvector of the 2x2 covariance.
  double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  blob.major_axis_angle = angle;
  return blob;
}

std::optional<Poke> BlobNextPoke(const BlobEstimate& current, Vec2 goal_centroid,
                                 const ArenaParams& arena,
                                 const BlobConfig& config) {
  const Vec2 v = goal_centroid - current.centroid;
  const double distance = v.Norm();
  if (distance < config.threshold) return std::nullopt;
  Poke poke;
  poke.px = current.centroid.x;
  poke.py = current.centroid.y;
  // Motion runs along theta + pi.
  poke.theta = WrapAngle(std::atan2(v.y, v.x) + std::numbers::pi);
  poke.length = std::clamp(distance * config.len_gain, arena.l_min, arena.l_max);
  return poke;
}

BlobPolicy::BlobPolicy(const ArenaParams& arena, const BlobConfig& config)
    : arena_(arena), config_(config) {
  config_.Validate();
}

void BlobPolicy::SetGoal(const Observation& goal) {
  goal_centroid_ = DetectBlob(goal).centroid;
}

Poke BlobPolicy::Decide(const Observation& current) {
  const std::optional<Poke> poke =
      BlobNextPoke(DetectBlob(current), goal_centroid_, arena_, config_);
  return poke ? *poke : Poke::NoPoke();
}

Episode RunBlobEpisode(const Pose& init, const Pose& goal,
                       const ArenaParams& arena, const BlobConfig& config,
                       uint64_t noise_seed) {
  BlobPolicy policy(arena, config);
  return RunPolicyEpisode(init, goal, policy, arena, config.max_pokes,
                          noise_seed);
}

}  // namespace poke
