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

#include "poke/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "poke/error.h"

namespace poke {

double RelativeLocationError(const Pose& final_pose, const Pose& goal,
                             const Pose& initial) {
  const double start = (initial.center() - goal.center()).Norm();
  if (start <= 1e-9) {
    throw InvalidArgument(
        "relative location error undefined: initial position equals goal");
  }
  return (final_pose.center() - goal.center()).Norm() / start;
}

double PoseErrorDegrees(const Pose& final_pose, const Pose& goal) {
  constexpr double kPi = std::numbers::pi;
  double diff = std::fmod(std::abs(final_pose.theta - goal.theta), kPi);
  diff = std::min(diff, kPi - diff);
  return std::clamp(diff * 180.0 / kPi, 0.0, 90.0);
}

SignTestResult PairedSignTest(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("sign test needs paired samples");
  SignTestResult r;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) {
      ++r.wins;
    } else if (b[i] < a[i]) {
      ++r.losses;
    } else {
      ++r.ties;
    }
  }
  const int n = r.wins + r.losses;
  if (n == 0) return r;
  // P(X <= min(wins, losses)) for X ~ Binomial(n, 1/2), doubled.
  const int k = std::min(r.wins, r.losses);
  double tail = 0.0;
  for (int i = 0; i <= k; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                     std::lgamma(n - i + 1.0) - n * std::numbers::ln2);
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace poke
