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

#ifndef POKE_NDARRAY_H_
#define POKE_NDARRAY_H_

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "poke/rng.h"

namespace poke {

// Cache-line aligned storage. Vectorized kernels peel differently depending
// on the address of their operands, so unaligned buffers would make results
// depend on where the allocator happened to place them.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

// Dense row-major array of doubles with a runtime shape.
class NdArray {
 public:
  NdArray() = default;
  explicit NdArray(std::vector<int> shape, double fill = 0.0);
  NdArray(std::vector<int> shape, std::vector<double> values);

  static NdArray Uniform(std::vector<int> shape, double lo, double hi,
                         Rng& rng);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_[axis]; }
  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](size_t i) { return values_[i]; }
  double operator[](size_t i) const { return values_[i]; }

  // Contiguous slice along the leading axis.
  std::span<double> row(int i);
  std::span<const double> row(int i) const;

  void Fill(double value);
  void SetZero() { Fill(0.0); }
  // Same values, new shape; element counts must match.
  NdArray Reshaped(std::vector<int> shape) const;
  bool AllFinite() const;
  bool SameShape(const NdArray& other) const { return shape_ == other.shape_; }

  std::string ShapeString() const;

  friend bool operator==(const NdArray&, const NdArray&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double, AlignedAllocator<double>> values_;
};

size_t ShapeSize(const std::vector<int>& shape);

}  // namespace poke

#endif  // POKE_NDARRAY_H_
