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

#include "poke/layers.h"

#include <cmath>

#include <Eigen/Core>
#include <fmt/format.h>

#include "poke/error.h"

namespace poke {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

struct ConvGeometry {
  int n, c, h, w, oc, k, oh, ow;
  int patch() const { return c * k * k; }
  int positions() const { return oh * ow; }
};

ConvGeometry CheckConv(const NdArray& input, const LayerParams& params,
                       int stride) {
  if (input.rank() != 4) {
    throw InvalidArgument("conv2d input must be [N, C, H, W], got " +
                          input.ShapeString());
  }
  const NdArray& w = params.weights;
  if (w.rank() != 4 || w.dim(2) != w.dim(3)) {
    throw InvalidArgument("conv2d weights must be [OC, C, K, K], got " +
                          w.ShapeString());
  }
  if (w.dim(1) != input.dim(1)) {
    throw InvalidArgument(fmt::format(
        "conv2d channel mismatch: input has {}, weights expect {}",
        input.dim(1), w.dim(1)));
  }
  if (params.biases.size() != static_cast<size_t>(w.dim(0))) {
    throw InvalidArgument("conv2d bias length must equal output channels");
  }
  if (stride < 1) throw InvalidArgument("conv2d stride must be positive");
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3),
                 w.dim(0),     w.dim(2),     0,            0};
  g.oh = ConvOutputSize(g.h, g.k, stride);
  g.ow = ConvOutputSize(g.w, g.k, stride);
  return g;
}

// Unfolds one sample into a [C*K*K, OH*OW] patch matrix.
void Im2Col(const double* image, const ConvGeometry& g, int stride,
            RowMat& cols) {
  cols.resize(g.patch(), g.positions());
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        double* dst = cols.row((c * g.k + ki) * g.k + kj).data();
        for (int oy = 0; oy < g.oh; ++oy) {
          const double* src = image + (c * g.h + oy * stride + ki) * g.w + kj;
          for (int ox = 0; ox < g.ow; ++ox) dst[oy * g.ow + ox] = src[ox * stride];
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters patch gradients back onto the image.
void Col2ImAdd(const RowMat& cols, const ConvGeometry& g, int stride,
               double* image) {
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        const double* src = cols.row((c * g.k + ki) * g.k + kj).data();
        for (int oy = 0; oy < g.oh; ++oy) {
          double* dst = image + (c * g.h + oy * stride + ki) * g.w + kj;
          for (int ox = 0; ox < g.ow; ++ox) dst[ox * stride] += src[oy * g.ow + ox];
        }
      }
    }
  }
}

void CheckDense(const NdArray& input, const LayerParams& params) {
  const NdArray& w = params.weights;
  if (w.rank() != 2) {
    throw InvalidArgument("dense weights must be [out, in], got " +
                          w.ShapeString());
  }
  if (input.rank() != 2 || input.dim(1) != w.dim(1)) {
    throw InvalidArgument(fmt::format(
        "dense input {} does not match fan-in {}", input.ShapeString(),
        w.dim(1)));
  }
  if (params.biases.size() != static_cast<size_t>(w.dim(0))) {
    throw InvalidArgument("dense bias length must equal fan-out");
  }
}

double GlorotLimit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

LayerParams::LayerParams(NdArray w, NdArray b)
    : weights(std::move(w)),
      biases(std::move(b)),
      weight_grad(weights.shape()),
      bias_grad(biases.shape()) {}

LayerParams LayerParams::Conv(int out_channels, int in_channels, int kernel,
                              Rng& rng) {
  const double limit = GlorotLimit(in_channels * kernel * kernel,
                                   out_channels * kernel * kernel);
  return LayerParams(
      NdArray::Uniform({out_channels, in_channels, kernel, kernel}, -limit,
                       limit, rng),
      NdArray({out_channels}));
}

LayerParams LayerParams::Dense(int out_features, int in_features, Rng& rng) {
  const double limit = GlorotLimit(in_features, out_features);
  return LayerParams(
      NdArray::Uniform({out_features, in_features}, -limit, limit, rng),
      NdArray({out_features}));
}

void LayerParams::ZeroGrad() {
  weight_grad.SetZero();
  bias_grad.SetZero();
}

int ConvOutputSize(int input, int kernel, int stride) {
  if (kernel < 1 || input < kernel) {
    throw InvalidArgument(fmt::format(
        "kernel {} does not fit input extent {}", kernel, input));
  }
  return (input - kernel) / stride + 1;
}

NdArray Conv2dForward(const NdArray& input, const LayerParams& params,
                      int stride) {
  const ConvGeometry g = CheckConv(input, params, stride);
  NdArray output({g.n, g.oc, g.oh, g.ow});
  const ConstMapMat weights(params.weights.data(), g.oc, g.patch());
  const ConstMapVec bias(params.biases.data(), g.oc);
  RowMat cols;
  for (int i = 0; i < g.n; ++i) {
    Im2Col(input.row(i).data(), g, stride, cols);
    MapMat out(output.row(i).data(), g.oc, g.positions());
    out.noalias() = weights * cols;
    out.colwise() += bias;
  }
  return output;
}

NdArray Conv2dBackward(const NdArray& input, const NdArray& grad_output,
                       LayerParams& params, int stride, bool input_grad) {
  const ConvGeometry g = CheckConv(input, params, stride);
  if (grad_output.shape() != std::vector<int>{g.n, g.oc, g.oh, g.ow}) {
    throw InvalidArgument("conv2d grad_output shape " +
                          grad_output.ShapeString() + " mismatches forward");
  }
  NdArray grad_input = input_grad ? NdArray(input.shape()) : NdArray();
  const ConstMapMat weights(params.weights.data(), g.oc, g.patch());
  MapMat weight_grad(params.weight_grad.data(), g.oc, g.patch());
  MapVec bias_grad(params.bias_grad.data(), g.oc);
  RowMat cols;
  RowMat grad_cols(g.patch(), g.positions());
  for (int i = 0; i < g.n; ++i) {
    Im2Col(input.row(i).data(), g, stride, cols);
    const ConstMapMat dy(grad_output.row(i).data(), g.oc, g.positions());
    weight_grad.noalias() += dy * cols.transpose();
    for (int o = 0; o < g.oc; ++o) {
      const double* row = dy.data() + static_cast<size_t>(o) * g.positions();
      double sum = 0.0;
      for (int p = 0; p < g.positions(); ++p) sum += row[p];
      bias_grad[o] += sum;
    }
    if (!input_grad) continue;
    grad_cols.noalias() = weights.transpose() * dy;
    Col2ImAdd(grad_cols, g, stride, grad_input.row(i).data());
  }
  return grad_input;
}

NdArray DenseForward(const NdArray& input, const LayerParams& params) {
  CheckDense(input, params);
  const int n = input.dim(0);
  const int in = params.weights.dim(1);
  const int out = params.weights.dim(0);
  NdArray output({n, out});
  const ConstMapMat x(input.data(), n, in);
  const ConstMapMat w(params.weights.data(), out, in);
  MapMat y(output.data(), n, out);
  y.noalias() = x * w.transpose();
  y.rowwise() += ConstMapVec(params.biases.data(), out).transpose();
  return output;
}

NdArray DenseBackward(const NdArray& input, const NdArray& grad_output,
                      LayerParams& params) {
  CheckDense(input, params);
  const int n = input.dim(0);
  const int in = params.weights.dim(1);
  const int out = params.weights.dim(0);
  if (grad_output.shape() != std::vector<int>{n, out}) {
    throw InvalidArgument("dense grad_output shape " +
                          grad_output.ShapeString() + " mismatches forward");
  }
  const ConstMapMat x(input.data(), n, in);
  const ConstMapMat w(params.weights.data(), out, in);
  const ConstMapMat dy(grad_output.data(), n, out);
  MapMat(params.weight_grad.data(), out, in).noalias() += dy.transpose() * x;
  // Fixed summation order; Eigen's reductions vary with operand alignment.
  for (int r = 0; r < n; ++r) {
    const double* row = grad_output.data() + static_cast<size_t>(r) * out;
    for (int o = 0; o < out; ++o) params.bias_grad[o] += row[o];
  }
  NdArray grad_input({n, in});
  MapMat(grad_input.data(), n, in).noalias() = dy * w;
  return grad_input;
}

NdArray ReluForward(const NdArray& input) {
  NdArray output = input;
  for (double& v : output.values()) v = v > 0.0 ? v : 0.0;
  return output;
}

NdArray ReluBackward(const NdArray& input, const NdArray& grad_output) {
  if (!input.SameShape(grad_output)) {
    throw InvalidArgument("relu grad_output shape mismatch");
  }
  NdArray grad_input(input.shape());
  for (size_t i = 0; i < input.size(); ++i) {
    grad_input[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
  }
  return grad_input;
}

}  // namespace poke
