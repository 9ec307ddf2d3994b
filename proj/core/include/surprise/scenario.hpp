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

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surprise/geometry.hpp"

namespace surprise {

enum class AgentKind { kVehicle, kPedestrian, kCyclist };

std::string_view to_string(AgentKind kind);
/// Throws DataError on an unknown token.
AgentKind parse_agent_kind(std::string_view token);

/// One timestamped kinematic sample. Heading lies in (-pi, pi].
struct AgentState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {vx, vy}; }
  double speed() const { return std::hypot(vx, vy); }
  bool operator==(const AgentState&) const = default;
};

/// Time-ordered samples on the scenario grid; nullopt marks "not observed".
using StateSequence = std::vector<std::optional<AgentState>>;
/// Fully observed sequence of states.
using Trajectory = std::vector<AgentState>;

struct Agent {
  std::string id;
  AgentKind kind = AgentKind::kVehicle;
  double length = 0.0;
  double width = 0.0;
  StateSequence states;

  bool operator==(const Agent&) const = default;
};

struct LaneSegment {
  std::string id;
  Polyline centerline;
  double width = 0.0;

  bool operator==(const LaneSegment&) const = default;
};

struct Scenario {
  std::string scenario_id;
  double dt = 0.5;
  std::string ego_id;
  std::vector<Agent> agents;
  std::vector<LaneSegment> lanes;
  std::vector<Polygon> drivable_area;
  double history_horizon = 5.0;
  double future_horizon = 4.0;

  const Agent* find_agent(std::string_view id) const;
  /// Length of the common time grid (longest state sequence).
  std::size_t num_steps() const;
  /// Timestamp of grid index 0, inferred from the first observed state.
  double time_origin() const;
  int history_steps() const;
  int future_steps() const;

  bool operator==(const Scenario&) const = default;
};

using ScenarioPtr = std::shared_ptr<const Scenario>;
using ScenarioSet = std::vector<ScenarioPtr>;

struct Violation {
  std::string subject;  // e.g. "agent 'a1'"
  std::string message;
  int step = -1;        // grid index when the violation is step-specific
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Lists every violated scenario/agent/lane invariant; never throws.
ValidationReport validate_scenario(const Scenario& s);

/// True when `p` lies inside a drivable polygon or, when the scenario has no
/// polygons, inside a lane corridor (centerline buffered by width / 2). A
/// scenario with neither polygons nor lanes is unbounded.
bool in_drivable_area(const Scenario& s, Vec2 p);

struct LaneMatch {
  const LaneSegment* lane = nullptr;
  double arc_length = 0.0;
  double distance = 0.0;
};

/// Lane whose centerline is nearest to `p`; ties go to the smaller lane id.
/// Throws DataError when the scenario has no lanes.
LaneMatch closest_lane(Vec2 p, const Scenario& s);

/// Agent data inside a history + future window.
struct SegmentAgent {
  std::string id;
  AgentKind kind = AgentKind::kVehicle;
  double length = 0.0;
  double width = 0.0;
  StateSequence states;  // history_steps + future_steps entries

  bool operator==(const SegmentAgent&) const = default;
};

/// A window of a scenario: `history_steps` samples ending at `split_index`
/// followed by `future_steps` samples. Variants produced by counterfactual
/// generators are Segments with edited agents and their own `variant_id`.
struct Segment {
  ScenarioPtr source;
  std::string variant_id = "base";
  int split_index = 0;
  int history_steps = 0;
  int future_steps = 0;
  std::vector<SegmentAgent> agents;

  const std::string& scenario_id() const { return source->scenario_id; }
  const std::string& ego_id() const { return source->ego_id; }
  double dt() const { return source->dt; }
  int window_size() const { return history_steps + future_steps; }
  /// Scenario grid index of window slot 0.
  int window_start() const { return split_index - history_steps + 1; }
  double time_at(int window_index) const;
  double split_time() const { return time_at(history_steps - 1); }
  /// Window slot whose grid time is `t`, or -1 when off the window.
  int window_index_of(double t) const;

  const SegmentAgent* find(std::string_view id) const;
  SegmentAgent* find(std::string_view id);

  std::span<const std::optional<AgentState>> history(const SegmentAgent& a) const {
    return std::span(a.states).first(static_cast<std::size_t>(history_steps));
  }
  std::span<const std::optional<AgentState>> future(const SegmentAgent& a) const {
    return std::span(a.states).subspan(static_cast<std::size_t>(history_steps));
  }
  /// State at the split (last history slot).
  const std::optional<AgentState>& current(const SegmentAgent& a) const {
    return a.states[static_cast<std::size_t>(history_steps - 1)];
  }
};

/// Cuts the window whose last history sample sits at `split_time`.
/// Throws ArgumentError when the time is off-grid or either side is short.
Segment slice_segment(const ScenarioPtr& s, double split_time);
/// Same, addressed by grid index.
Segment slice_segment_at(const ScenarioPtr& s, int split_index);
/// Earliest split with a full history (index history_steps - 1).
Segment default_segment(const ScenarioPtr& s);

/// Reads a line-delimited scenario file. Every record must validate; errors
/// name the offending line. Throws IoError / DataError.
ScenarioSet load_dataset(const std::filesystem::path& path);
/// Writes one scenario per line with round-trip number formatting.
void save_dataset(const std::filesystem::path& path, const ScenarioSet& data);

/// In-memory (de)serialisation of a single record, used by the file helpers.
Scenario parse_scenario(std::string_view json_line);
std::string serialize_scenario(const Scenario& s);

}  // namespace surprise
