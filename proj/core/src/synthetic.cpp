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

#include "surprise/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "surprise/error.hpp"

namespace surprise {

namespace {

constexpr double kDt = 0.5;
constexpr int kSteps = 18;
constexpr double kSplit = 4.5;
constexpr double kCarLength = 4.5;
constexpr double kCarWidth = 1.9;
constexpr double kLaneWidth = 3.6;
constexpr double kOncomingOffset = 4.5;

using Motion = std::function<AgentState(double)>;

Agent make_agent(std::string id, const Motion& motion) {
  Agent a{std::move(id), AgentKind::kVehicle, kCarLength, kCarWidth, {}};
  for (int k = 0; k < kSteps; ++k) {
    AgentState s = motion(k * kDt);
    s.t = k * kDt;
    s.heading = normalize_angle(s.heading);
    a.states.push_back(s);
  }
  return a;
}

// Straight travel along `heading` through `anchor` at time `t_anchor`.
Motion cruise(Vec2 anchor, double t_anchor, double heading, double speed) {
  return [=](double t) {
    const Vec2 dir{std::cos(heading), std::sin(heading)};
    const Vec2 p = anchor + dir * (speed * (t - t_anchor));
    return AgentState{t, p.x, p.y, heading, speed * dir.x, speed * dir.y};
  };
}

// Constant acceleration from t = 0, speed held in [0, v_max].
Motion ramp(Vec2 start, double heading, double v0, double accel, double v_max) {
  return [=](double t) {
    const Vec2 dir{std::cos(heading), std::sin(heading)};
    const double limit = accel < 0.0 ? 0.0 : v_max;
    const double t_sat = accel != 0.0 ? (limit - v0) / accel : std::numeric_limits<double>::infinity();
    const double tau = std::min(t, std::max(0.0, t_sat));
    const double s = v0 * tau + 0.5 * accel * tau * tau + (t > tau ? (v0 + accel * tau) * (t - tau) : 0.0);
    const double v = std::clamp(v0 + accel * tau, 0.0, std::max(v0, v_max));
    const Vec2 p = start + dir * s;
    return AgentState{t, p.x, p.y, heading, v * dir.x, v * dir.y};
  };
}

Motion arc(Vec2 start, double heading, double speed, double yaw_rate) {
  return [=](double t) {
    const double h = heading + yaw_rate * t;
    const double r = speed / yaw_rate;
    const Vec2 p = start + Vec2{r * (std::sin(h) - std::sin(heading)), -r * (std::cos(h) - std::cos(heading))};
    return AgentState{t, p.x, p.y, h, speed * std::cos(h), speed * std::sin(h)};
  };
}

Motion lane_shift(Vec2 start, double speed, double offset, double t0, double duration) {
  return [=](double t) {
    const double u = std::clamp((t - t0) / duration, 0.0, 1.0);
    const double y = start.y + offset * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
    const double vy = (t > t0 && t < t0 + duration)
                          ? offset * 0.5 * std::numbers::pi / duration * std::sin(std::numbers::pi * u)
                          : 0.0;
    return AgentState{t, start.x + speed * t, y, std::atan2(vy, speed), speed, vy};
  };
}

Motion parked(Vec2 at, double heading) {
  return [=](double t) { return AgentState{t, at.x, at.y, heading, 0.0, 0.0}; };
}

LaneSegment straight_lane(std::string id, Vec2 a, Vec2 b) { return {std::move(id), {a, b}, kLaneWidth}; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Two agents on a distant road doing assorted manoeuvres.
void add_bystanders(Scenario& s, std::mt19937_64& rng) {
  const double road_y = 60.0;
  s.lanes.push_back(straight_lane("L3", {-200.0, road_y}, {300.0, road_y}));
  for (int b = 0; b < 2; ++b) {
    const Vec2 start{uniform(rng, -60.0, 40.0) + 60.0 * b, road_y};
    const int behaviour = static_cast<int>(rng() % 6);
    Motion m;
    switch (behaviour) {
      case 0:
        m = cruise(start, 0.0, 0.0, uniform(rng, 5.0, 13.0));
        break;
      case 1:
        m = ramp(start, 0.0, uniform(rng, 10.0, 14.0), -uniform(rng, 1.8, 2.6), 20.0);
        break;
      case 2:
        m = ramp(start, 0.0, uniform(rng, 2.0, 5.0), uniform(rng, 1.0, 1.6), 14.0);
        break;
      case 3:
        m = parked(start, 0.0);
        break;
      case 4:
        m = arc(start, 0.0, uniform(rng, 4.0, 7.0), (rng() % 2 ? 1.0 : -1.0) * uniform(rng, 0.12, 0.2));
        break;
      default:
        m = lane_shift(start, uniform(rng, 6.0, 10.0), (rng() % 2 ? 1.0 : -1.0) * 3.5, uniform(rng, 0.5, 3.0), 4.0);
        break;
    }
    s.agents.push_back(make_agent("bystander-" + std::to_string(b), m));
  }
}

Scenario base_scene(std::string id) {
  Scenario s;
  s.scenario_id = std::move(id);
  s.dt = kDt;
  s.ego_id = "ego";
  s.history_horizon = 5.0;
  s.future_horizon = 4.0;
  s.lanes.push_back(straight_lane("L0", {-200.0, 0.0}, {300.0, 0.0}));
  s.lanes.push_back(straight_lane("L1", {300.0, kOncomingOffset}, {-200.0, kOncomingOffset}));
  return s;
}

void transform_scene(Scenario& s, double theta, Vec2 shift) {
  auto move = [&](Vec2 p) { return p.rotated(theta) + shift; };
  for (auto& a : s.agents)
    for (auto& st : a.states) {
      if (!st) continue;
      const Vec2 p = move(st->position());
      const Vec2 v = st->velocity().rotated(theta);
      st->x = p.x;
      st->y = p.y;
      st->vx = v.x;
      st->vy = v.y;
      st->heading = normalize_angle(st->heading + theta);
    }
  for (auto& lane : s.lanes)
    for (auto& p : lane.centerline) p = move(p);
  for (auto& poly : s.drivable_area)
    for (auto& p : poly) p = move(p);
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& opts) {
  if (opts.conflict_scenes < 0 || opts.free_flow_scenes < 0) throw ArgumentError("scene counts must be non-negative");
  std::mt19937_64 rng(opts.seed);
  const int total = opts.conflict_scenes + opts.free_flow_scenes;
  std::vector<bool> is_conflict(static_cast<std::size_t>(total), false);
  std::fill(is_conflict.begin(), is_conflict.begin() + opts.conflict_scenes, true);
  for (std::size_t i = is_conflict.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    const bool tmp = is_conflict[i - 1];
    is_conflict[i - 1] = is_conflict[j];
    is_conflict[j] = tmp;
  }

  SyntheticCorpus corpus;
  for (int n = 0; n < total; ++n) {
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%03d", n);
    Scenario s = base_scene(id);
    const double v_ego = uniform(rng, 7.0, 10.0);
    s.agents.push_back(make_agent("ego", cruise({0.0, 0.0}, kSplit, 0.0, v_ego)));
    std::string archetype;
    const double pick = uniform(rng, 0.0, 1.0);
    if (is_conflict[static_cast<std::size_t>(n)]) {
      if (pick < 0.5) {
        archetype = "slower-lead";
        const double gap = uniform(rng, 14.0, 20.0);
        const double v_lead = std::max(0.0, v_ego - uniform(rng, 5.0, 7.0));
        s.agents.push_back(make_agent("lead", cruise({gap, 0.0}, kSplit, 0.0, v_lead)));
      } else if (pick < 0.8) {
        archetype = "crossing";
        const double t_ego = uniform(rng, 1.2, 2.0);
        const double lag = uniform(rng, 0.3, 1.0);
        const double v_cross = uniform(rng, 4.0, 6.0);
        const double x_cross = v_ego * t_ego;
        s.lanes.push_back(straight_lane("L2", {x_cross, -200.0}, {x_cross, 200.0}));
        s.agents.push_back(make_agent(
            "crossing", cruise({x_cross, 0.0}, kSplit + t_ego + lag, std::numbers::pi / 2.0, v_cross)));
      } else {
        archetype = "close-headway";
        const double gap = uniform(rng, 10.0, 14.0);
        s.agents.push_back(make_agent("lead", cruise({gap, 0.0}, kSplit, 0.0, v_ego)));
      }
    } else {
      if (pick < 0.3) {
        archetype = "oncoming";
        const double ahead = uniform(rng, 15.0, 25.0);
        s.agents.push_back(
            make_agent("oncoming", cruise({ahead, kOncomingOffset}, kSplit, std::numbers::pi, uniform(rng, 6.0, 9.0))));
      } else {
        archetype = "open-road";
        const double ahead = uniform(rng, 35.0, 50.0);
        s.agents.push_back(make_agent("away", cruise({ahead, 0.0}, kSplit, 0.0, v_ego + uniform(rng, 1.0, 3.0))));
      }
    }
    add_bystanders(s, rng);
    if (opts.random_pose)
      transform_scene(s, uniform(rng, -std::numbers::pi, std::numbers::pi),
                      {uniform(rng, -500.0, 500.0), uniform(rng, -500.0, 500.0)});
    corpus.labels[s.scenario_id] = is_conflict[static_cast<std::size_t>(n)];
    corpus.archetype[s.scenario_id] = archetype;
    corpus.scenarios.push_back(std::make_shared<const Scenario>(std::move(s)));
  }
  return corpus;
}

ScenarioPtr car_following_scene() {
  Scenario s = base_scene("car-following");
  s.agents.push_back(make_agent("ego", cruise({0.0, 0.0}, kSplit, 0.0, 6.0)));
  s.agents.push_back(make_agent("follower", cruise({-26.0, 0.0}, kSplit, 0.0, 8.0)));
  s.lanes.push_back(straight_lane("L3", {-200.0, 100.0}, {300.0, 100.0}));
  s.agents.push_back(make_agent("bystander", cruise({0.0, 100.0}, kSplit, 0.0, 7.0)));
  return std::make_shared<const Scenario>(std::move(s));
}

PrimitiveLibrary car_following_primitives() {
  const int n = 10;
  auto build = [&](std::string id, const Motion& m) {
    Trajectory states;
    for (int k = 0; k <= n; ++k) states.push_back(m(k * kDt));
    return MotionPrimitive{std::move(id), n * kDt, kDt, canonicalize(states), "synthetic"};
  };
  PrimitiveLibrary lib;
  lib.primitives.push_back(build("constant-speed", cruise({0.0, 0.0}, 0.0, 0.0, 6.0)));
  lib.primitives.push_back(build("hard-brake", ramp({0.0, 0.0}, 0.0, 11.0, -1.8, 11.0)));
  return lib;
}

}  // namespace surprise
