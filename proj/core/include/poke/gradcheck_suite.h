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

#ifndef POKE_GRADCHECK_SUITE_H_
#define POKE_GRADCHECK_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "poke/grad_check.h"

namespace poke {

struct GradCheckReport {
  std::string name;
  GradCheckResult result;
};

struct GradCheckSuiteOptions {
  uint64_t seed = 0;
  double step = 1e-5;
  // Fraction of parameters probed in the full-network checks. Standalone
  // layers are small and are probed exhaustively.
  double network_fraction = 0.01;
  // Relative error floor of the full-network checks. Their loss is of order
  // 10, so with h = 1e-5 the central difference carries roundoff of up to a
  // few 1e-10; below the floor entries must agree to 1e-9 absolute.
  double network_floor = 1e-5;
};

// Checks every layer type (including input gradients), both losses, and
// the full joint network with detached and undetached forward targets.
std::vector<GradCheckReport> RunGradCheckSuite(
    const GradCheckSuiteOptions& options = {});

double MaxRelativeError(const std::vector<GradCheckReport>& reports);

}  // namespace poke

#endif  // POKE_GRADCHECK_SUITE_H_
