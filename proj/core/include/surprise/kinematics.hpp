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

// Open-loop kinematic rollouts shared by the counterfactual generators, the
// reference predictor and the rule planner. Every rollout returns states for
// steps 1..horizon/dt after the start state; the start state is not repeated.

#pragma once

#include "surprise/scenario.hpp"

namespace surprise {

/// Number of dt steps in `horizon`; throws ArgumentError when `horizon` is
/// not a positive integer multiple of `dt`.
int steps_in(double horizon, double dt);

/// p_k = p_0 + k dt v with constant heading and velocity.
Trajectory cvm_rollout(const AgentState& start, double horizon, double dt);

/// Constant longitudinal acceleration along the direction of travel. Speed
/// never drops below zero; a stopped vehicle holds its position.
Trajectory accel_rollout(const AgentState& start, double accel, double horizon, double dt);

/// Advances along the lane centerline from the projected arc-length at the
/// current speed with heading tangent to the centerline. Travel runs against
/// the centerline direction when the agent faces the other way. The rollout
/// holds the end point (zero velocity) once the centerline runs out.
Trajectory lane_follow_rollout(const AgentState& start, const LaneSegment& lane, double horizon, double dt);

/// Positions of a trajectory flattened as (x1, y1, x2, y2, ...).
std::vector<double> flatten_positions(std::span<const AgentState> traj);

/// Rebuilds states from flattened positions; headings and velocities come
/// from finite differences starting at `start`.
Trajectory trajectory_from_positions(const AgentState& start, std::span<const double> flat, double dt);

}  // namespace surprise
