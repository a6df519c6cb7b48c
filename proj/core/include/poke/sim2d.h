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

#ifndef POKE_SIM2D_H_
#define POKE_SIM2D_H_

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "poke/rng.h"

namespace poke {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double Norm() const { return std::hypot(x, y); }
};

inline double Dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 2D cross product a x b.
inline double Cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Geometry and dynamics constants of the walled arena. Lengths in pixels.
struct ArenaParams {
  double arena_size = 64.0;
  double rect_w = 16.0;
  double rect_h = 8.0;
  double k_t = 0.8;    // translation per pixel of push
  double k_r = 0.03;   // radians per pixel of push at unit normalized lever
  double wall_margin = 2.0;
  double noise_std = 0.0;
  double l_min = 4.0;
  double l_max = 20.0;

  // Throws InvalidArgument when an invariant is violated.
  void Validate() const;

  int image_size() const { return static_cast<int>(arena_size); }
  double half_diagonal() const { return 0.5 * std::hypot(rect_w, rect_h); }

  friend bool operator==(const ArenaParams&, const ArenaParams&) = default;
};

// Rectangle configuration: center in pixels, orientation in [0, 2pi).
struct Pose {
  double cx = 0.0;
  double cy = 0.0;
  double theta = 0.0;

  Vec2 center() const { return {cx, cy}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

// A finger sweep. The finger starts at p + (l/2)(cos t, sin t) and moves to
// p - (l/2)(cos t, sin t), so the motion direction is theta + pi.
struct Poke {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;
  double length = 0.0;
  bool is_nopoke = false;

  static Poke NoPoke() { return Poke{.is_nopoke = true}; }
  Vec2 center() const { return {px, py}; }
  friend bool operator==(const Poke&, const Poke&) = default;
};

struct Contact {
  Vec2 point;
  double push_len = 0.0;
};

// Single-channel image, row-major, values in {0, 1} for renders.
class Observation {
 public:
  Observation() = default;
  explicit Observation(int size) : size_(size), pixels_(size * size, 0.0) {}

  int size() const { return size_; }
  double& at(int row, int col) { return pixels_[row * size_ + col]; }
  double at(int row, int col) const { return pixels_[row * size_ + col]; }
  const std::vector<double>& pixels() const { return pixels_; }
  std::vector<double>& pixels() { return pixels_; }

  friend bool operator==(const Observation&, const Observation&) = default;

 private:
  int size_ = 0;
  std::vector<double> pixels_;
};

// Wraps an angle into [0, 2pi).
double WrapAngle(double theta);

// Returns (p1, p2). Throws InvalidArgument for a no-poke.
std::pair<Vec2, Vec2> PokeEndpoints(const Poke& poke);

// Unit vector of finger motion, p2 - p1.
Vec2 MotionDirection(const Poke& poke);

bool PointInRect(Vec2 point, const Pose& pose, const ArenaParams& params);

// True when all four corners lie inside the arena shrunk by wall_margin.
bool InBounds(const Pose& pose, const ArenaParams& params, double tol = 1e-9);

// First point where the sweep p1 -> p2 meets the rectangle, and the remaining
// sweep length from there to p2. A sweep starting inside the rectangle
// contacts at p1 with the full length.
std::optional<Contact> IntersectPokeRect(const Pose& pose, const Poke& poke,
                                         const ArenaParams& params);

// Quasi-static response to a poke. `rng` is only read when noise_std > 0 and
// may be null otherwise.
Pose Step(const Pose& pose, const Poke& poke, const ArenaParams& params,
          Rng* rng = nullptr);

Observation Render(const Pose& pose, const ArenaParams& params);

// Poke with center uniform over the rectangle, direction uniform over
// [0, 2pi), length uniform over [l_min, l_max].
Poke SampleRandomPoke(const Pose& pose, const ArenaParams& params, Rng& rng);

// Pose uniform over the set of in-bounds configurations.
Pose RandomPose(const ArenaParams& params, Rng& rng);

}  // namespace poke

#endif  // POKE_SIM2D_H_
