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

// Counterfactual generators: scenario edits that condition, replace or delete
// the target agent's motion, plus the motion-primitive library they draw on.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surprise/predictor.hpp"
#include "surprise/scenario.hpp"

namespace surprise {

enum class GeneratorKind { kFutNone, kFutGt, kFutCvm, kFutCvmLane, kFutPred, kFutPrim, kHistRmv, kHistPrim };

inline constexpr std::array<GeneratorKind, 8> kAllGeneratorKinds = {
    GeneratorKind::kFutNone, GeneratorKind::kFutGt,   GeneratorKind::kFutCvm,    GeneratorKind::kFutCvmLane,
    GeneratorKind::kFutPred, GeneratorKind::kFutPrim, GeneratorKind::kHistRmv, GeneratorKind::kHistPrim};

/// "fut-none", "fut-gt", "fut-cvm", "fut-cvm-l", "fut-pred", "fut-prim",
/// "hist-rmv", "hist-prim".
std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view token);
bool edits_future(GeneratorKind kind);

/// State expressed in a primitive's canonical frame.
struct RelativeState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  bool operator==(const RelativeState&) const = default;
};

enum class Behavior { kStationary, kStraight, kBrake, kAccelerate, kLeftTurn, kRightTurn, kLaneChange };

std::string_view to_string(Behavior b);

struct MotionPrimitive {
  std::string id;
  double duration = 0.0;
  double dt = 0.0;
  std::vector<RelativeState> relative_states;  // steps() + 1 states, state 0 at the origin
  std::string source;

  int steps() const { return static_cast<int>(relative_states.size()) - 1; }
  bool operator==(const MotionPrimitive&) const = default;
};

struct BehaviorThresholds {
  double stationary_speed = 0.5;     // m/s
  double stationary_travel = 1.0;    // m
  double turn_heading = 0.35;        // rad
  double lane_change_offset = 2.0;   // m
  double speed_change = 1.5;         // m/s
};

/// Coarse behaviour label from the endpoint displacement, heading change and
/// speed change.
Behavior classify(const MotionPrimitive& p, const BehaviorThresholds& th = {});

struct PrimitiveLibrary {
  std::vector<MotionPrimitive> primitives;

  /// Throws DataError for malformed records (non-canonical first state, state
  /// count inconsistent with duration/dt).
  static PrimitiveLibrary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  bool operator==(const PrimitiveLibrary&) const = default;
};

/// Expresses `states` in the frame of its first state.
std::vector<RelativeState> canonicalize(std::span<const AgentState> states);

/// Collects every fully observed agent window of `horizon` seconds, bins the
/// windows by behaviour and endpoint geometry and keeps one window per bin.
/// Output alternates across behaviours; the order inside a behaviour is a
/// seeded shuffle. Throws DataError when no window qualifies.
PrimitiveLibrary extract_primitives(const ScenarioSet& data, double horizon, int max_count, std::uint64_t seed);

enum class Anchor { kFirst, kLast };

/// Rigid transform of the primitive so that its first (or last) state takes
/// the anchor pose. Timestamps run on the primitive grid relative to the
/// anchored state. All steps()+1 states are returned.
Trajectory place_primitive(const MotionPrimitive& prim, const AgentState& anchor, Anchor which = Anchor::kFirst);

/// True iff at each state the target's box intersects no other agent's box at
/// the same window slot and the centre lies in the drivable area. States must
/// lie on the segment window.
bool feasible(std::span<const AgentState> traj, const Segment& seg, const std::string& target);

struct Variant {
  std::string id;
  Segment segment;
  std::optional<Trajectory> condition;
};

struct CounterfactualSet {
  std::string scenario_id;
  std::string target_id;
  GeneratorKind kind = GeneratorKind::kFutNone;
  std::vector<Variant> variants;
};

struct GenerateOptions {
  const PrimitiveLibrary* library = nullptr;
  const Predictor* predictor = nullptr;
  int max_variants = 8;
  std::uint64_t seed = 0;
};

/// Future edits keep the segment's variant id ("base") since the observed
/// history is unchanged; history edits get "hist-rmv" or
/// "hist-prim:<primitive id>". Throws GenerationError when the requested edit
/// is impossible for this segment and ArgumentError for missing inputs.
CounterfactualSet generate(const Segment& seg, const std::string& target, GeneratorKind kind,
                           const GenerateOptions& opts);

}  // namespace surprise
