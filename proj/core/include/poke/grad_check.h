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

#ifndef POKE_GRAD_CHECK_H_
#define POKE_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "poke/layers.h"

namespace poke {

struct GradCheckOptions {
  double step = 1e-5;
  // Fraction of each tensor's entries that is probed; at least one entry per
  // tensor is always checked.
  double fraction = 0.01;
  uint64_t seed = 0;
  // Denominator floor of the relative error. Below it entries are compared
  // absolutely, which keeps finite-difference roundoff on near-zero
  // gradients from reading as a mismatch.
  double floor = 1e-8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t entries_checked = 0;
  // Entries whose analytic and numeric gradients were both below the floor.
  size_t entries_below_floor = 0;
  // Entries whose +-step evaluations landed in different linear regions of
  // a piecewise-linear loss; a central difference is no oracle there.
  size_t entries_skipped = 0;
  // Location of the worst entry, e.g. "layer 2 weights[17]".
  std::string worst;
};

// |a - n| / max(|a|, |n|, floor).
double RelativeError(double analytic, double numeric, double floor = 1e-8);

// A loss value plus an identifier of the linear region it was evaluated in
// (for example a hash of every ReLU gate), or a constant for smooth losses.
struct LossSample {
  double value = 0.0;
  uint64_t region = 0;
};

// Compares analytic gradients against central differences.
//   loss():     evaluates the scalar loss at the current parameter values.
//   backward(): recomputes the analytic gradients into the layers' gradient
//               accumulators (the harness zeroes them first).
// Parameter values are restored bit-exactly before returning.
GradCheckResult GradCheck(std::span<LayerParams* const> layers,
                          const std::function<double()>& loss,
                          const std::function<void()>& backward,
                          const GradCheckOptions& options = {});
// Same, skipping entries whose stencil crosses a region boundary.
GradCheckResult GradCheck(std::span<LayerParams* const> layers,
                          const std::function<LossSample()>& loss,
                          const std::function<void()>& backward,
                          const GradCheckOptions& options = {});

}  // namespace poke

#endif  // POKE_GRAD_CHECK_H_
