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

#include "poke/losses.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poke/error.h"

namespace poke {

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax of empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

LossWithGrad SoftmaxCrossEntropy(std::span<const double> logits, int target) {
  if (target < 0 || static_cast<size_t>(target) >= logits.size()) {
    throw OutOfRange(fmt::format("target class {} outside [0, {})", target,
                                 logits.size()));
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  const double log_norm = peak + std::log(total);

  LossWithGrad out;
  out.loss = log_norm - logits[target];
  out.grad.resize(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(logits[i] - log_norm);
  }
  out.grad[target] -= 1.0;
  return out;
}

LossWithGrad L1Loss(std::span<const double> pred,
                    std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw InvalidArgument(fmt::format("l1 loss shape mismatch: {} vs {}",
                                      pred.size(), target.size()));
  }
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  LossWithGrad out;
  out.grad.resize(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    out.loss += std::abs(diff);
    out.grad[i] = diff > 0.0 ? inv_n : (diff < 0.0 ? -inv_n : 0.0);
  }
  out.loss *= inv_n;
  return out;
}

}  // namespace poke
