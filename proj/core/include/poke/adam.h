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

#ifndef POKE_ADAM_H_
#define POKE_ADAM_H_

#include <cstdint>
#include <vector>

#include "poke/layers.h"
#include "poke/ndarray.h"

namespace poke {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over a fixed list of layers. The optimizer keeps
// pointers to the layers; they must outlive it and must not be reallocated.
class Adam {
 public:
  Adam(std::vector<LayerParams*> layers, AdamOptions options = {});

  // Applies one update from the accumulated gradients, then zeroes them.
  // Throws NumericError (leaving parameters untouched) if any gradient is
  // non-finite.
  void Step();

  int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

 private:
  struct Moments {
    NdArray m;
    NdArray v;
  };
  void Update(NdArray& param, NdArray& grad, Moments& moments,
              double step_size, double bias2);

  std::vector<LayerParams*> layers_;
  std::vector<Moments> weight_moments_;
  std::vector<Moments> bias_moments_;
  AdamOptions options_;
  int64_t step_ = 0;
};

}  // namespace poke

#endif  // POKE_ADAM_H_
