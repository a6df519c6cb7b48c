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

#include "poke/ndarray.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "poke/error.h"

namespace poke {

size_t ShapeSize(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw InvalidArgument("negative extent in shape");
    n *= static_cast<size_t>(d);
  }
  return n;
}

NdArray::NdArray(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), values_(ShapeSize(shape_), fill) {}

NdArray::NdArray(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (values_.size() != ShapeSize(shape_)) {
    throw InvalidArgument(fmt::format("{} values do not fill shape {}",
                                      values_.size(), ShapeString()));
  }
}

NdArray NdArray::Uniform(std::vector<int> shape, double lo, double hi,
                         Rng& rng) {
  NdArray a(std::move(shape));
  for (double& v : a.values_) v = rng.Uniform(lo, hi);
  return a;
}

std::span<double> NdArray::row(int i) {
  const size_t stride = values_.size() / shape_[0];
  return std::span<double>(values_).subspan(i * stride, stride);
}

std::span<const double> NdArray::row(int i) const {
  const size_t stride = values_.size() / shape_[0];
  return std::span<const double>(values_).subspan(i * stride, stride);
}

void NdArray::Fill(double value) {
  std::fill(values_.begin(), values_.end(), value);
}

NdArray NdArray::Reshaped(std::vector<int> shape) const {
  if (ShapeSize(shape) != values_.size()) {
    throw InvalidArgument(fmt::format("cannot reshape {} to [{}]",
                                      ShapeString(), fmt::join(shape, ", ")));
  }
  NdArray out = *this;
  out.shape_ = std::move(shape);
  return out;
}

bool NdArray::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string NdArray::ShapeString() const {
  return fmt::format("[{}]", fmt::join(shape_, ", "));
}

}  // namespace poke
