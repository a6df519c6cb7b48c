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

#ifndef POKE_LOSSES_H_
#define POKE_LOSSES_H_

#include <span>
#include <vector>

namespace poke {

struct LossWithGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Numerically stable softmax (max-subtracted).
std::vector<double> Softmax(std::span<const double> logits);

// -log softmax(logits)[target]; gradient softmax - onehot(target).
LossWithGrad SoftmaxCrossEntropy(std::span<const double> logits, int target);

// mean |pred - target|; subgradient sign(pred - target) / N with 0 at ties.
LossWithGrad L1Loss(std::span<const double> pred,
                    std::span<const double> target);

}  // namespace poke

#endif  // POKE_LOSSES_H_
