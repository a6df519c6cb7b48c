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

#include "poke/discretize.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "poke/error.h"

namespace poke {
namespace {

constexpr double kAngleBinWidth = 2.0 * std::numbers::pi / kAngleBins;

int Bin(double value, double lo, double hi, int bins) {
  const int b = static_cast<int>(std::floor(bins * (value - lo) / (hi - lo)));
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

DiscretizedAction Discretize(const Poke& poke, const ArenaParams& params) {
  DiscretizedAction a;
  const int row = Bin(poke.py, 0.0, params.arena_size, kLocationGrid);
  const int col = Bin(poke.px, 0.0, params.arena_size, kLocationGrid);
  a.loc_bin = row * kLocationGrid + col;
  a.angle_bin =
      static_cast<int>(std::floor(WrapAngle(poke.theta) / kAngleBinWidth)) %
      kAngleBins;
  a.len_bin = poke.is_nopoke
                  ? kNoPokeBin
                  : Bin(poke.length, params.l_min, params.l_max, kNoPokeBin);
  return a;
}

Poke Undiscretize(const DiscretizedAction& a, const ArenaParams& params) {
  if (a.loc_bin < 0 || a.loc_bin >= kLocationBins || a.angle_bin < 0 ||
      a.angle_bin >= kAngleBins || a.len_bin < 0 || a.len_bin >= kLengthBins) {
    throw OutOfRange("discretized action bin out of range");
  }
  if (a.is_nopoke()) return Poke::NoPoke();
  const double cell = params.arena_size / kLocationGrid;
  Poke p;
  p.px = (a.loc_bin % kLocationGrid + 0.5) * cell;
  p.py = (a.loc_bin / kLocationGrid + 0.5) * cell;
  p.theta = (a.angle_bin + 0.5) * kAngleBinWidth;
  p.length = params.l_min +
             (a.len_bin + 0.5) * (params.l_max - params.l_min) / kNoPokeBin;
  return p;
}

std::array<double, kActionFeatures> EncodeAction(const Poke& poke,
                                                 const ArenaParams& params) {
  if (poke.is_nopoke) return {0.0, 0.0, 0.0, 0.0, -1.0};
  return {2.0 * poke.px / params.arena_size - 1.0,
          2.0 * poke.py / params.arena_size - 1.0,
          std::cos(poke.theta),
          std::sin(poke.theta),
          2.0 * (poke.length - params.l_min) / (params.l_max - params.l_min) -
              1.0};
}

}  // namespace poke
