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

#include "surprise/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "surprise/error.hpp"

namespace surprise {

int steps_in(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ArgumentError("horizon and dt must be positive");
  const double ratio = horizon / dt;
  const double r = std::round(ratio);
  if (r < 1.0 || std::abs(ratio - r) > 1e-6) throw ArgumentError("horizon is not an integer multiple of dt");
  return static_cast<int>(r);
}

Trajectory cvm_rollout(const AgentState& start, double horizon, double dt) {
  const int n = steps_in(horizon, dt);
  Trajectory out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double tau = k * dt;
    out.push_back({start.t + tau, start.x + tau * start.vx, start.y + tau * start.vy, start.heading, start.vx,
                   start.vy});
  }
  return out;
}

Trajectory accel_rollout(const AgentState& start, double accel, double horizon, double dt) {
  const int n = steps_in(horizon, dt);
  const double v0 = start.speed();
  const double dir = v0 > 0.0 ? std::atan2(start.vy, start.vx) : start.heading;
  const Vec2 unit{std::cos(dir), std::sin(dir)};
  // Time at which a decelerating agent comes to rest.
  const double t_stop = accel < 0.0 ? v0 / -accel : std::numeric_limits<double>::infinity();
  Trajectory out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double tau = std::min(k * dt, t_stop);
    const double s = v0 * tau + 0.5 * accel * tau * tau;
    const double v = std::max(0.0, v0 + accel * tau);
    const Vec2 p = start.position() + unit * s;
    out.push_back({start.t + k * dt, p.x, p.y, start.heading, v * unit.x, v * unit.y});
  }
  return out;
}

Trajectory lane_follow_rollout(const AgentState& start, const LaneSegment& lane, double horizon, double dt) {
  const int n = steps_in(horizon, dt);
  const double speed = start.speed();
  const auto proj = project_onto_polyline(lane.centerline, start.position());
  const double tangent = polyline_pose_at(lane.centerline, proj.arc_length).heading;
  const double facing = speed > 0.0 ? std::atan2(start.vy, start.vx) : start.heading;
  const double direction = std::cos(facing - tangent) >= 0.0 ? 1.0 : -1.0;
  Trajectory out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double s = proj.arc_length + direction * k * dt * speed;
    const auto pose = polyline_pose_at(lane.centerline, s);
    const double heading = direction > 0.0 ? pose.heading : normalize_angle(pose.heading + std::numbers::pi);
    const double v = pose.clamped ? 0.0 : speed;
    out.push_back({start.t + k * dt, pose.position.x, pose.position.y, heading, v * std::cos(heading),
                   v * std::sin(heading)});
  }
  return out;
}

std::vector<double> flatten_positions(std::span<const AgentState> traj) {
  std::vector<double> flat;
  flat.reserve(2 * traj.size());
  for (const auto& s : traj) {
    flat.push_back(s.x);
    flat.push_back(s.y);
  }
  return flat;
}

Trajectory trajectory_from_positions(const AgentState& start, std::span<const double> flat, double dt) {
  if (flat.size() % 2 != 0) throw ArgumentError("flattened trajectory has odd length");
  Trajectory out;
  AgentState prev = start;
  for (std::size_t k = 0; k < flat.size() / 2; ++k) {
    AgentState s;
    s.t = start.t + static_cast<double>(k + 1) * dt;
    s.x = flat[2 * k];
    s.y = flat[2 * k + 1];
    s.vx = (s.x - prev.x) / dt;
    s.vy = (s.y - prev.y) / dt;
    s.heading = std::hypot(s.vx, s.vy) > 1e-9 ? std::atan2(s.vy, s.vx) : prev.heading;
    out.push_back(s);
    prev = s;
  }
  return out;
}

}  // namespace surprise
