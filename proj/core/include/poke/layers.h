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

#ifndef POKE_LAYERS_H_
#define POKE_LAYERS_H_

#include "poke/ndarray.h"
#include "poke/rng.h"

namespace poke {

// Trainable tensors of one layer plus their gradient accumulators.
//   conv:  weights [out_ch, in_ch, k, k], biases [out_ch]
//   dense: weights [out, in],             biases [out]
struct LayerParams {
  NdArray weights;
  NdArray biases;
  NdArray weight_grad;
  NdArray bias_grad;

  LayerParams() = default;
  LayerParams(NdArray w, NdArray b);

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static LayerParams Conv(int out_channels, int in_channels, int kernel,
                          Rng& rng);
  static LayerParams Dense(int out_features, int in_features, Rng& rng);

  void ZeroGrad();
  size_t parameter_count() const { return weights.size() + biases.size(); }
};

// Output extent of a valid convolution; throws when the kernel does not fit.
int ConvOutputSize(int input, int kernel, int stride);

// Valid cross-correlation. input [N, C, H, W] -> [N, out_ch, OH, OW].
NdArray Conv2dForward(const NdArray& input, const LayerParams& params,
                      int stride);
// Accumulates into params' gradients and returns d(loss)/d(input), or an
// empty array when `input_grad` is false (first layer of a network).
NdArray Conv2dBackward(const NdArray& input, const NdArray& grad_output,
                       LayerParams& params, int stride,
                       bool input_grad = true);

// y = W x + b on each row. input [N, in] -> [N, out].
NdArray DenseForward(const NdArray& input, const LayerParams& params);
NdArray DenseBackward(const NdArray& input, const NdArray& grad_output,
                      LayerParams& params);

NdArray ReluForward(const NdArray& input);
// Gradient passes where the forward input was strictly positive.
NdArray ReluBackward(const NdArray& input, const NdArray& grad_output);

}  // namespace poke

#endif  // POKE_LAYERS_H_
