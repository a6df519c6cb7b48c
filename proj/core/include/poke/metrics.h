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

#ifndef POKE_METRICS_H_
#define POKE_METRICS_H_

#include <vector>

#include "poke/sim2d.h"

namespace poke {

// |final - goal| / |initial - goal| over object centers. Throws
// InvalidArgument when the initial and goal centers coincide (distance
// <= 1e-9), where the ratio is undefined.
double RelativeLocationError(const Pose& final_pose, const Pose& goal,
                             const Pose& initial);

// Angle between the major axes of the two poses in degrees, folded into
// [0, 90] since a rectangle's axis is symmetric under a half turn.
double PoseErrorDegrees(const Pose& final_pose, const Pose& goal);

struct SignTestResult {
  int wins = 0;    // pairs where the first sample is smaller
  int losses = 0;  // pairs where the second sample is smaller
  int ties = 0;
  double p_value = 1.0;  // two-sided exact binomial, ties dropped
};

// Paired sign test on (a[i], b[i]); "win" means a[i] < b[i].
SignTestResult PairedSignTest(const std::vector<double>& a,
                              const std::vector<double>& b);

}  // namespace poke

#endif  // POKE_METRICS_H_
