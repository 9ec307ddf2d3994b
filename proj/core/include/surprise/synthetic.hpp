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

// Synthetic scenes with construction-known interaction labels.

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "surprise/counterfactuals.hpp"
#include "surprise/scenario.hpp"

namespace surprise {

struct SyntheticOptions {
  int conflict_scenes = 100;
  int free_flow_scenes = 100;
  std::uint64_t seed = 7;
  bool random_pose = true;  // random rigid transform per scene
};

struct SyntheticCorpus {
  ScenarioSet scenarios;
  std::map<std::string, bool> labels;  // true for conflict scenes
  std::map<std::string, std::string> archetype;
};

/// 18 steps at dt 0.5 with 5 s history and 4 s future. Conflict scenes put a
/// slower lead ahead of the ego, a same-speed lead at a short headway, or a
/// crossing agent timed to pass just after the ego. Free-flow scenes keep
/// everyone beyond the interaction radius except, in some of them, an
/// oncoming car in the adjacent lane. Every scene carries two distant
/// bystanders with mixed behaviours.
SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& opts = {});

/// Ego leading at 6 m/s, a faster follower (8 m/s) 26 m behind and a
/// bystander 100 m away. Agent ids "ego", "follower", "bystander".
ScenarioPtr car_following_scene();

/// Hand-made 5 s primitives: "constant-speed" at 6 m/s and "hard-brake" from
/// 11 m/s to 2 m/s.
PrimitiveLibrary car_following_primitives();

}  // namespace surprise
