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

#include "surprise/geometry.hpp"

#include <algorithm>
#include <limits>

namespace surprise {

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i];
    const Vec2 ab = line[i + 1] - a;
    const double len2 = ab.squared_norm();
    const double len = std::sqrt(len2);
    double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const Vec2 q = a + ab * u;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.arc_length = walked + u * len;
      best.point = q;
    }
    walked += len;
  }
  return best;
}

double polyline_length(std::span<const Vec2> line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) total += (line[i + 1] - line[i]).norm();
  return total;
}

PolylinePose polyline_pose_at(std::span<const Vec2> line, double s) {
  PolylinePose pose;
  const double total = polyline_length(line);
  if (s < 0.0) {
    s = 0.0;
    pose.clamped = true;
  } else if (s > total) {
    s = total;
    pose.clamped = true;
  }
  double walked = 0.0;
  const std::size_t edges = line.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2 ab = line[i + 1] - line[i];
    const double len = ab.norm();
    const bool last = i + 1 == edges;
    if (s < walked + len || last) {
      const double u = len > 0.0 ? std::clamp((s - walked) / len, 0.0, 1.0) : 0.0;
      pose.position = line[i] + ab * u;
      pose.heading = std::atan2(ab.y, ab.x);
      if (last && u >= 1.0) pose.position = line[i + 1];
      return pose;
    }
    walked += len;
  }
  pose.position = line.back();
  return pose;
}

bool point_in_polygon(std::span<const Vec2> poly, Vec2 p) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[j];
    const Vec2 b = poly[i];
    // Boundary check first so edge points are inside regardless of parity.
    const Vec2 ab = b - a;
    const Vec2 ap = p - a;
    if (std::abs(ab.cross(ap)) <= 1e-12 * std::max(1.0, ab.norm()) && ap.dot(p - b) <= 0.0) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

bool polygon_is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (poly[i] == poly[j]) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a0 = poly[i];
    const Vec2 a1 = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a0, a1, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 fwd = Vec2{std::cos(heading), std::sin(heading)} * (0.5 * length);
  const Vec2 left = Vec2{-std::sin(heading), std::cos(heading)} * (0.5 * width);
  return {center + fwd + left, center - fwd + left, center - fwd - left, center + fwd - left};
}

bool boxes_intersect(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes = {
      Vec2{std::cos(a.heading), std::sin(a.heading)}, Vec2{-std::sin(a.heading), std::cos(a.heading)},
      Vec2{std::cos(b.heading), std::sin(b.heading)}, Vec2{-std::sin(b.heading), std::cos(b.heading)}};
  for (const Vec2 axis : axes) {
    double a_min = std::numeric_limits<double>::infinity();
    double a_max = -a_min;
    double b_min = a_min;
    double b_max = -a_min;
    for (const Vec2 c : ca) {
      const double v = c.dot(axis);
      a_min = std::min(a_min, v);
      a_max = std::max(a_max, v);
    }
    for (const Vec2 c : cb) {
      const double v = c.dot(axis);
      b_min = std::min(b_min, v);
      b_max = std::max(b_max, v);
    }
    if (a_max < b_min || b_max < a_min) return false;
  }
  return true;
}

}  // namespace surprise
