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

#include "poke/adam.h"

#include <cmath>

#include "poke/error.h"

namespace poke {

Adam::Adam(std::vector<LayerParams*> layers, AdamOptions options)
    : layers_(std::move(layers)), options_(options) {
  for (LayerParams* layer : layers_) {
    weight_moments_.push_back(
        {NdArray(layer->weights.shape()), NdArray(layer->weights.shape())});
    bias_moments_.push_back(
        {NdArray(layer->biases.shape()), NdArray(layer->biases.shape())});
  }
}

void Adam::Step() {
  for (const LayerParams* layer : layers_) {
    if (!layer->weight_grad.AllFinite() || !layer->bias_grad.AllFinite()) {
      throw NumericError("non-finite gradient passed to Adam");
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  const double step_size = options_.learning_rate / bias1;
  for (size_t i = 0; i < layers_.size(); ++i) {
    Update(layers_[i]->weights, layers_[i]->weight_grad, weight_moments_[i],
           step_size, bias2);
    Update(layers_[i]->biases, layers_[i]->bias_grad, bias_moments_[i],
           step_size, bias2);
  }
}

void Adam::Update(NdArray& param, NdArray& grad, Moments& moments,
                  double step_size, double bias2) {
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  for (size_t j = 0; j < param.size(); ++j) {
    const double g = grad[j];
    moments.m[j] = b1 * moments.m[j] + (1.0 - b1) * g;
    moments.v[j] = b2 * moments.v[j] + (1.0 - b2) * g * g;
    param[j] -= step_size * moments.m[j] /
                (std::sqrt(moments.v[j] / bias2) + options_.epsilon);
    grad[j] = 0.0;
  }
}

}  // namespace poke
