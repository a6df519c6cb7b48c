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

#ifndef POKE_DISCRETIZE_H_
#define POKE_DISCRETIZE_H_

#include <array>

#include "poke/sim2d.h"

namespace poke {

inline constexpr int kLocationGrid = 20;
inline constexpr int kLocationBins = kLocationGrid * kLocationGrid;
inline constexpr int kAngleBins = 36;
inline constexpr int kLengthBins = 11;
// The last length bin encodes "no poke".
inline constexpr int kNoPokeBin = kLengthBins - 1;
inline constexpr int kActionFeatures = 5;

struct DiscretizedAction {
  int loc_bin = 0;    // row * 20 + col over the image square
  int angle_bin = 0;  // 10 degree sectors of theta
  int len_bin = 0;    // 10 sectors of [l_min, l_max], or kNoPokeBin

  bool is_nopoke() const { return len_bin == kNoPokeBin; }
  friend bool operator==(const DiscretizedAction&,
                         const DiscretizedAction&) = default;
};

// Total over valid pokes: out-of-range coordinates clamp to the edge bins.
// The location and angle of a no-poke are binned like any other poke.
DiscretizedAction Discretize(const Poke& poke, const ArenaParams& params);

// Bin centers; len_bin == kNoPokeBin yields Poke::NoPoke().
Poke Undiscretize(const DiscretizedAction& action, const ArenaParams& params);

// Continuous action features fed to the forward model, each in [-1, 1]:
// (px, py) scaled over the image, (cos theta, sin theta), scaled length.
// A no-poke encodes as all zeros except length = -1.
std::array<double, kActionFeatures> EncodeAction(const Poke& poke,
                                                 const ArenaParams& params);

}  // namespace poke

#endif  // POKE_DISCRETIZE_H_
