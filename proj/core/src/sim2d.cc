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

#include "poke/sim2d.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "poke/error.h"

namespace poke {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxRejectionDraws = 10000;

// Coordinates of `point` in the rectangle frame (origin at the center, x
// along the long side).
Vec2 ToLocal(Vec2 point, const Pose& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const Vec2 d = point - pose.center();
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

// Half extents of the axis-aligned bounding box of the rotated rectangle.
Vec2 BoundingHalfExtents(double theta, const ArenaParams& params) {
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  const double hw = 0.5 * params.rect_w;
  const double hh = 0.5 * params.rect_h;
  return {hw * c + hh * s, hw * s + hh * c};
}

}  // namespace

void ArenaParams::Validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidArgument("invalid arena params: " + what);
  };
  if (!(rect_h > 0.0)) fail("rect_h must be positive");
  if (!(rect_w > rect_h)) fail("rect_w must exceed rect_h");
  if (!(arena_size > rect_w)) fail("arena_size must exceed rect_w");
  if (arena_size != std::floor(arena_size) || arena_size > 4096.0) {
    fail("arena_size must be an integer pixel count");
  }
  if (!(k_t > 0.0 && k_t <= 1.0)) fail("k_t must lie in (0, 1]");
  if (!(k_r >= 0.0)) fail("k_r must be non-negative");
  if (!(wall_margin >= 0.0)) fail("wall_margin must be non-negative");
  if (!(noise_std >= 0.0)) fail("noise_std must be non-negative");
  if (!(l_min > 0.0 && l_min < l_max)) fail("need 0 < l_min < l_max");
  // Any orientation must fit between the walls, otherwise clamping is
  // ill-posed.
  if (arena_size - 2.0 * wall_margin < 2.0 * half_diagonal()) {
    fail("rectangle cannot rotate freely inside the walls");
  }
}

double WrapAngle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

std::pair<Vec2, Vec2> PokeEndpoints(const Poke& poke) {
  if (poke.is_nopoke) throw InvalidArgument("no endpoints for no-poke");
  const Vec2 half{0.5 * poke.length * std::cos(poke.theta),
                  0.5 * poke.length * std::sin(poke.theta)};
  return {poke.center() + half, poke.center() - half};
}

Vec2 MotionDirection(const Poke& poke) {
  return {-std::cos(poke.theta), -std::sin(poke.theta)};
}

bool PointInRect(Vec2 point, const Pose& pose, const ArenaParams& params) {
  const Vec2 local = ToLocal(point, pose);
  return std::abs(local.x) <= 0.5 * params.rect_w &&
         std::abs(local.y) <= 0.5 * params.rect_h;
}

bool InBounds(const Pose& pose, const ArenaParams& params, double tol) {
  const Vec2 ext = BoundingHalfExtents(pose.theta, params);
  const double lo = params.wall_margin - tol;
  const double hi = params.arena_size - params.wall_margin + tol;
  return pose.cx - ext.x >= lo && pose.cx + ext.x <= hi &&
         pose.cy - ext.y >= lo && pose.cy + ext.y <= hi;
}

std::optional<Contact> IntersectPokeRect(const Pose& pose, const Poke& poke,
                                         const ArenaParams& params) {
  if (poke.is_nopoke) return std::nullopt;
  const auto [p1, p2] = PokeEndpoints(poke);
  const Vec2 a = ToLocal(p1, pose);
  const Vec2 b = ToLocal(p2, pose);
  const double hw = 0.5 * params.rect_w;
  const double hh = 0.5 * params.rect_h;
  const double total = (p2 - p1).Norm();

  if (std::abs(a.x) <= hw && std::abs(a.y) <= hh) {
    return Contact{p1, total};
  }

  // Liang-Barsky clipping of a + t (b - a), t in [0, 1].
  const Vec2 d = b - a;
  double t_enter = 0.0;
  double t_exit = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x + hw, hw - a.x, a.y + hh, hh - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t_enter = std::max(t_enter, t);
    } else {
      t_exit = std::min(t_exit, t);
    }
  }
  if (t_enter > t_exit) return std::nullopt;
  return Contact{p1 + t_enter * (p2 - p1), (1.0 - t_enter) * total};
}

Pose Step(const Pose& pose, const Poke& poke, const ArenaParams& params,
          Rng* rng) {
  const std::optional<Contact> contact = IntersectPokeRect(pose, poke, params);
  if (!contact) return pose;

  const Vec2 d = MotionDirection(poke);
  // The contact lies on the sweep line, so its lever cross d equals that of
  // the poke center; this form is exactly zero for a push through the center.
  const Vec2 lever = poke.center() - pose.center();
  const double s = contact->push_len;

  Vec2 delta = (params.k_t * s) * d;
  // The lever arm is normalized by the half diagonal so k_r is the rotation
  // per pushed pixel at the rectangle's corner.
  double dtheta = params.k_r * s * Cross(lever, d) / params.half_diagonal();

  if (params.noise_std > 0.0) {
    if (rng == nullptr) throw InvalidArgument("noisy step requires an rng");
    delta.x += params.noise_std * rng->Normal();
    delta.y += params.noise_std * rng->Normal();
    dtheta += params.noise_std / params.half_diagonal() * rng->Normal();
  }

  Pose next{pose.cx + delta.x, pose.cy + delta.y,
            WrapAngle(pose.theta + dtheta)};
  const Vec2 ext = BoundingHalfExtents(next.theta, params);
  const double lo = params.wall_margin;
  const double hi = params.arena_size - params.wall_margin;
  next.cx = std::clamp(next.cx, lo + ext.x, hi - ext.x);
  next.cy = std::clamp(next.cy, lo + ext.y, hi - ext.y);
  return next;
}

Observation Render(const Pose& pose, const ArenaParams& params) {
  const int n = params.image_size();
  Observation image(n);
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double hw = 0.5 * params.rect_w;
  const double hh = 0.5 * params.rect_h;

  // Only scan the bounding box; everything else stays zero.
  const Vec2 ext = BoundingHalfExtents(pose.theta, params);
  const int row_lo = std::max(0, static_cast<int>(std::floor(pose.cy - ext.y)) - 1);
  const int row_hi = std::min(n - 1, static_cast<int>(std::ceil(pose.cy + ext.y)) + 1);
  const int col_lo = std::max(0, static_cast<int>(std::floor(pose.cx - ext.x)) - 1);
  const int col_hi = std::min(n - 1, static_cast<int>(std::ceil(pose.cx + ext.x)) + 1);
  for (int row = row_lo; row <= row_hi; ++row) {
    const double dy = row + 0.5 - pose.cy;
    for (int col = col_lo; col <= col_hi; ++col) {
      const double dx = col + 0.5 - pose.cx;
      const double lx = c * dx + s * dy;
      const double ly = -s * dx + c * dy;
      if (std::abs(lx) <= hw && std::abs(ly) <= hh) image.at(row, col) = 1.0;
    }
  }
  return image;
}

Poke SampleRandomPoke(const Pose& pose, const ArenaParams& params, Rng& rng) {
  const Vec2 ext = BoundingHalfExtents(pose.theta, params);
  for (int draw = 0; draw < kMaxRejectionDraws; ++draw) {
    const Vec2 p{rng.Uniform(pose.cx - ext.x, pose.cx + ext.x),
                 rng.Uniform(pose.cy - ext.y, pose.cy + ext.y)};
    if (!PointInRect(p, pose, params)) continue;
    Poke poke;
    poke.px = p.x;
    poke.py = p.y;
    poke.theta = rng.Uniform(0.0, kTwoPi);
    poke.length = rng.Uniform(params.l_min, params.l_max);
    return poke;
  }
  throw Error(fmt::format(
      "poke sampling failed after {} draws (degenerate rectangle geometry)",
      kMaxRejectionDraws));
}

Pose RandomPose(const ArenaParams& params, Rng& rng) {
  const double lo = params.wall_margin + 0.5 * params.rect_h;
  const double hi = params.arena_size - params.wall_margin - 0.5 * params.rect_h;
  while (true) {
    Pose pose;
    pose.theta = rng.Uniform(0.0, kTwoPi);
    pose.cx = rng.Uniform(lo, hi);
    pose.cy = rng.Uniform(lo, hi);
    if (InBounds(pose, params, 0.0)) return pose;
  }
}

}  // namespace poke
