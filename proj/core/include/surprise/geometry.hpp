// Copyright 2026 The Surprise Potential Authors
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

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace surprise {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }

  /// Counter-clockwise rotation by `angle` radians.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

struct PolylineProjection {
  double distance = 0.0;    // point-to-polyline distance
  double arc_length = 0.0;  // arc-length of the nearest point
  Vec2 point;               // nearest point on the polyline
};

/// Nearest point on a polyline with at least two vertices. Among equally
/// near points the one with the smallest arc-length wins.
PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p);

double polyline_length(std::span<const Vec2> line);

struct PolylinePose {
  Vec2 position;
  double heading = 0.0;  // tangent direction
  bool clamped = false;  // requested arc-length lay outside [0, length]
};

/// Point and tangent at arc-length `s`; `s` is clamped to the polyline. At an
/// interior vertex the tangent of the outgoing edge is reported.
PolylinePose polyline_pose_at(std::span<const Vec2> line, double s);

/// Even-odd point in polygon; boundary points count as inside.
bool point_in_polygon(std::span<const Vec2> poly, Vec2 p);

/// True when no two non-adjacent edges intersect and no vertex repeats.
bool polygon_is_simple(std::span<const Vec2> poly);

/// Closed segment intersection, collinear overlaps included.
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

/// Oriented rectangle centred at `center` with the long side along `heading`.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
};

/// Separating-axis test. Touching boxes intersect.
bool boxes_intersect(const OrientedBox& a, const OrientedBox& b);

}  // namespace surprise
