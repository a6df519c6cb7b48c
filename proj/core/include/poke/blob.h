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

#ifndef POKE_BLOB_H_
#define POKE_BLOB_H_

#include <optional>

#include "poke/planner.h"
#include "poke/sim2d.h"

namespace poke {

// Foreground statistics of a rendered image.
struct BlobEstimate {
  Vec2 centroid;
  double major_axis_angle = 0.0;  // radians in [0, pi)
  int pixel_count = 0;
};

struct BlobConfig {
  // Stop once the centroid is this close to the goal centroid (pixels).
  double threshold = 3.0;
  // Poke length per pixel of remaining centroid distance, before clamping to
  // [l_min, l_max].
  double len_gain = 1.0;
  int max_pokes = 10;

  void Validate() const;
};

// Mean and principal axis of pixels with value > 0.5. Throws Error when the
// image has no foreground.
BlobEstimate DetectBlob(const Observation& image);

// Poke centered on the current centroid whose finger moves toward the goal
// centroid; nullopt once within the threshold.
std::optional<Poke> BlobNextPoke(const BlobEstimate& current, Vec2 goal_centroid,
                                 const ArenaParams& arena,
                                 const BlobConfig& config);

class BlobPolicy : public Policy {
 public:
  BlobPolicy(const ArenaParams& arena, const BlobConfig& config);

  void SetGoal(const Observation& goal) override;
  Poke Decide(const Observation& current) override;
  TerminalReason stop_reason() const override {
    return TerminalReason::kThreshold;
  }

 private:
  ArenaParams arena_;
  BlobConfig config_;
  Vec2 goal_centroid_;
};

Episode RunBlobEpisode(const Pose& init, const Pose& goal,
                       const ArenaParams& arena, const BlobConfig& config,
                       uint64_t noise_seed = 0);

}  // namespace poke

#endif  // POKE_BLOB_H_
