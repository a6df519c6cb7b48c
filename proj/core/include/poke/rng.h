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

#ifndef POKE_RNG_H_
#define POKE_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace poke {

// SplitMix64 (Steele, Lea, Flood 2014). Every random draw in the library goes
// through this generator and the conversions below, so datasets and
// checkpoints are reproducible on any platform with IEEE doubles. The
// <random> distributions are avoided on purpose: their output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    return Mix(z);
  }

  // Uniform double in [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Uses rejection to avoid modulo bias.
  uint64_t UniformInt(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; the second variate is discarded so that
  // the number of Next() calls per draw is fixed.
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Independent child stream; advances this generator by one draw.
  Rng Split() { return Rng(Mix(Next() ^ 0x94D049BB133111EBULL)); }

  uint64_t state() const { return state_; }

  static uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

// Stateless hash of (seed, index) used to derive per-item streams.
inline uint64_t HashIndex(uint64_t seed, uint64_t index) {
  return Rng::Mix(Rng::Mix(seed + 0x9E3779B97F4A7C15ULL) ^
                  (index * 0xD1B54A32D192ED03ULL));
}

}  // namespace poke

#endif  // POKE_RNG_H_
