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

#include "surprise/counterfactuals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "json_io.hpp"
#include "surprise/error.hpp"
#include "surprise/kinematics.hpp"

namespace surprise {

namespace {

constexpr double kCanonicalTolerance = 1e-9;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

// Interleaves per-behaviour queues: one item from each non-empty behaviour in
// enum order per round.
template <typename T>
std::vector<T> round_robin(std::map<Behavior, std::vector<T>>& groups) {
  std::vector<T> out;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (auto& [b, items] : groups) {
      if (round < items.size()) {
        out.push_back(items[round]);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

bool same_grid(double a, double b) { return std::abs(a - b) <= 1e-9; }

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kFutNone:
      return "fut-none";
    case GeneratorKind::kFutGt:
      return "fut-gt";
    case GeneratorKind::kFutCvm:
      return "fut-cvm";
    case GeneratorKind::kFutCvmLane:
      return "fut-cvm-l";
    case GeneratorKind::kFutPred:
      return "fut-pred";
    case GeneratorKind::kFutPrim:
      return "fut-prim";
    case GeneratorKind::kHistRmv:
      return "hist-rmv";
    case GeneratorKind::kHistPrim:
      return "hist-prim";
  }
  return "fut-none";
}

GeneratorKind parse_generator_kind(std::string_view token) {
  for (const auto k : kAllGeneratorKinds)
    if (to_string(k) == token) return k;
  throw ArgumentError("unknown generator '" + std::string(token) + "'");
}

bool edits_future(GeneratorKind kind) { return kind != GeneratorKind::kHistRmv && kind != GeneratorKind::kHistPrim; }

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::kStationary:
      return "stationary";
    case Behavior::kStraight:
      return "straight";
    case Behavior::kBrake:
      return "brake";
    case Behavior::kAccelerate:
      return "accelerate";
    case Behavior::kLeftTurn:
      return "left-turn";
    case Behavior::kRightTurn:
      return "right-turn";
    case Behavior::kLaneChange:
      return "lane-change";
  }
  return "straight";
}

Behavior classify(const MotionPrimitive& p, const BehaviorThresholds& th) {
  if (p.relative_states.empty()) return Behavior::kStationary;
  const auto& first = p.relative_states.front();
  const auto& last = p.relative_states.back();
  double max_speed = 0.0;
  for (const auto& s : p.relative_states) max_speed = std::max(max_speed, std::hypot(s.vx, s.vy));
  const double travel = std::hypot(last.x - first.x, last.y - first.y);
  if (max_speed < th.stationary_speed && travel < th.stationary_travel) return Behavior::kStationary;
  const double turn = normalize_angle(last.heading - first.heading);
  if (std::abs(turn) > th.turn_heading) return turn > 0.0 ? Behavior::kLeftTurn : Behavior::kRightTurn;
  if (std::abs(last.y - first.y) > th.lane_change_offset) return Behavior::kLaneChange;
  const double dv = std::hypot(last.vx, last.vy) - std::hypot(first.vx, first.vy);
  if (dv < -th.speed_change) return Behavior::kBrake;
  if (dv > th.speed_change) return Behavior::kAccelerate;
  return Behavior::kStraight;
}

std::vector<RelativeState> canonicalize(std::span<const AgentState> states) {
  std::vector<RelativeState> out;
  if (states.empty()) return out;
  const AgentState& o = states.front();
  out.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    if (k == 0) {
      out.push_back({0.0, 0.0, 0.0, Vec2{s.vx, s.vy}.rotated(-o.heading).x, Vec2{s.vx, s.vy}.rotated(-o.heading).y});
      continue;
    }
    const Vec2 p = (s.position() - o.position()).rotated(-o.heading);
    const Vec2 v = s.velocity().rotated(-o.heading);
    out.push_back({p.x, p.y, normalize_angle(s.heading - o.heading), v.x, v.y});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Library IO

PrimitiveLibrary PrimitiveLibrary::load(const std::filesystem::path& path) {
  PrimitiveLibrary lib;
  std::set<std::string> ids;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    try {
      const auto j = detail::json::parse(line);
      MotionPrimitive p;
      p.id = detail::require_string(j, "id");
      p.duration = detail::require_number(j, "duration");
      p.dt = detail::require_number(j, "dt");
      p.source = j.contains("source") ? j.at("source").get<std::string>() : std::string();
      for (const auto& row : detail::require(j, "relative_states")) {
        const auto v = row.get<std::vector<double>>();
        if (v.size() != 5) throw DataError("relative state needs 5 values");
        for (const double x : v)
          if (!std::isfinite(x)) throw DataError("non-finite relative state");
        p.relative_states.push_back({v[0], v[1], v[2], v[3], v[4]});
      }
      const int n = steps_in(p.duration, p.dt);
      if (p.steps() != n) throw DataError("primitive '" + p.id + "' state count does not match duration/dt");
      const auto& f = p.relative_states.front();
      if (std::abs(f.x) > kCanonicalTolerance || std::abs(f.y) > kCanonicalTolerance ||
          std::abs(f.heading) > kCanonicalTolerance)
        throw DataError("primitive '" + p.id + "' does not start at the canonical origin");
      if (!ids.insert(p.id).second) throw DataError("duplicate primitive id '" + p.id + "'");
      lib.primitives.push_back(std::move(p));
    } catch (const detail::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return lib;
}

void PrimitiveLibrary::save(const std::filesystem::path& path) const {
  auto out = detail::open_for_write(path);
  for (const auto& p : primitives) {
    detail::json rows = detail::json::array();
    for (const auto& s : p.relative_states) rows.push_back({s.x, s.y, s.heading, s.vx, s.vy});
    const detail::json j{{"id", p.id}, {"duration", p.duration}, {"dt", p.dt}, {"relative_states", rows},
                         {"source", p.source}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Extraction

PrimitiveLibrary extract_primitives(const ScenarioSet& data, double horizon, int max_count, std::uint64_t seed) {
  if (max_count < 1) throw ArgumentError("max_count must be positive");
  // Bin key: behaviour, dt, endpoint cell, heading cell, end-speed cell.
  using BinKey = std::tuple<int, long long, long long, long long, long long, long long>;
  std::map<BinKey, MotionPrimitive> representatives;
  std::vector<BinKey> order;
  for (const auto& scenario : data) {
    const int n = steps_in(horizon, scenario->dt);
    for (const auto& agent : scenario->agents) {
      const int len = static_cast<int>(agent.states.size());
      for (int start = 0; start + n < len; ++start) {
        Trajectory window;
        window.reserve(static_cast<std::size_t>(n + 1));
        for (int k = start; k <= start + n; ++k) {
          if (!agent.states[static_cast<std::size_t>(k)]) break;
          window.push_back(*agent.states[static_cast<std::size_t>(k)]);
        }
        if (static_cast<int>(window.size()) != n + 1) continue;
        MotionPrimitive p;
        p.duration = n * scenario->dt;
        p.dt = scenario->dt;
        p.relative_states = canonicalize(window);
        p.source = scenario->scenario_id + "/" + agent.id + "@" + std::to_string(start);
        const auto& end = p.relative_states.back();
        const Behavior b = classify(p);
        const BinKey key{static_cast<int>(b), std::llround(p.dt * 1e6), static_cast<long long>(std::floor(end.x / 2.0)),
                         static_cast<long long>(std::floor(end.y / 1.0)),
                         static_cast<long long>(std::floor(end.heading / 0.2)),
                         static_cast<long long>(std::floor(std::hypot(end.vx, end.vy) / 1.0))};
        if (representatives.emplace(key, std::move(p)).second) order.push_back(key);
      }
    }
  }
  if (order.empty()) throw DataError("no fully observed agent window of the requested horizon in the dataset");

  std::map<Behavior, std::vector<BinKey>> groups;
  for (const auto& key : order) groups[static_cast<Behavior>(std::get<0>(key))].push_back(key);
  std::mt19937_64 rng(seed);
  for (auto& [b, keys] : groups) seeded_shuffle(keys, rng);
  const auto interleaved = round_robin(groups);

  PrimitiveLibrary lib;
  for (const auto& key : interleaved) {
    if (static_cast<int>(lib.primitives.size()) >= max_count) break;
    MotionPrimitive p = representatives.at(key);
    char id[32];
    std::snprintf(id, sizeof(id), "prim-%04zu", lib.primitives.size());
    p.id = id;
    lib.primitives.push_back(std::move(p));
  }
  return lib;
}

// ---------------------------------------------------------------------------
// Placement and feasibility

Trajectory place_primitive(const MotionPrimitive& prim, const AgentState& anchor, Anchor which) {
  const std::size_t n = prim.relative_states.size();
  Trajectory out;
  if (n == 0) return out;
  const std::size_t pivot = which == Anchor::kFirst ? 0 : n - 1;
  const RelativeState& ref = prim.relative_states[pivot];
  const double rotation = anchor.heading - ref.heading;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = prim.relative_states[k];
    AgentState s;
    s.t = anchor.t + (static_cast<double>(k) - static_cast<double>(pivot)) * prim.dt;
    if (k == pivot) {
      s.x = anchor.x;
      s.y = anchor.y;
      s.heading = anchor.heading;
    } else {
      const Vec2 p = anchor.position() + Vec2{r.x - ref.x, r.y - ref.y}.rotated(rotation);
      s.x = p.x;
      s.y = p.y;
      s.heading = normalize_angle(r.heading + rotation);
    }
    const Vec2 v = Vec2{r.vx, r.vy}.rotated(rotation);
    s.vx = v.x;
    s.vy = v.y;
    out.push_back(s);
  }
  return out;
}

bool feasible(std::span<const AgentState> traj, const Segment& seg, const std::string& target) {
  const SegmentAgent* me = seg.find(target);
  if (!me) throw ArgumentError("target '" + target + "' is not in the segment");
  for (const auto& s : traj) {
    const int slot = seg.window_index_of(s.t);
    if (slot < 0) throw ArgumentError("trajectory state off the segment window");
    if (!in_drivable_area(*seg.source, s.position())) return false;
    const OrientedBox mine{s.position(), s.heading, me->length, me->width};
    for (const auto& other : seg.agents) {
      if (other.id == target) continue;
      const auto& os = other.states[static_cast<std::size_t>(slot)];
      if (!os) continue;
      if (boxes_intersect(mine, OrientedBox{os->position(), os->heading, other.length, other.width})) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

const AgentState& require_current(const Segment& seg, const SegmentAgent& a) {
  const auto& cur = seg.current(a);
  if (!cur)
    throw GenerationError("target '" + a.id + "' is not observed at the split of scenario '" + seg.scenario_id() +
                          "'");
  return *cur;
}

Segment with_future(const Segment& seg, const std::string& target, const Trajectory& future) {
  Segment edited = seg;
  SegmentAgent* a = edited.find(target);
  for (int k = 0; k < seg.future_steps; ++k)
    a->states[static_cast<std::size_t>(seg.history_steps + k)] = future[static_cast<std::size_t>(k)];
  return edited;
}

Variant future_variant(const Segment& seg, const std::string& target, std::string id, Trajectory condition) {
  Variant v{std::move(id), with_future(seg, target, condition), std::move(condition)};
  return v;
}

// Library primitives with the wanted step count on the segment grid, spread
// over behaviours with a seeded order inside each behaviour.
std::vector<const MotionPrimitive*> candidate_primitives(const PrimitiveLibrary& lib, int steps, double dt,
                                                         std::uint64_t seed) {
  std::map<Behavior, std::vector<const MotionPrimitive*>> groups;
  for (const auto& p : lib.primitives)
    if (p.steps() == steps && same_grid(p.dt, dt)) groups[classify(p)].push_back(&p);
  std::mt19937_64 rng(seed);
  for (auto& [b, ps] : groups) seeded_shuffle(ps, rng);
  return round_robin(groups);
}

}  // namespace

CounterfactualSet generate(const Segment& seg, const std::string& target, GeneratorKind kind,
                           const GenerateOptions& opts) {
  if (opts.max_variants < 1) throw ArgumentError("max_variants must be positive");
  CounterfactualSet out{seg.scenario_id(), target, kind, {}};
  if (kind == GeneratorKind::kFutNone) {
    out.variants.push_back({std::string(to_string(kind)), seg, std::nullopt});
    return out;
  }
  const SegmentAgent* agent = seg.find(target);
  if (!agent) throw GenerationError("target '" + target + "' is absent from scenario '" + seg.scenario_id() + "'");
  const double dt = seg.dt();
  const double future_horizon = seg.future_steps * dt;
  const std::uint64_t seed = opts.seed ^ fnv1a(seg.scenario_id() + "/" + target + "/" + seg.variant_id);

  switch (kind) {
    case GeneratorKind::kFutNone:
      break;
    case GeneratorKind::kFutGt: {
      Trajectory future;
      for (const auto& s : seg.future(*agent)) {
        if (!s) throw GenerationError("target '" + target + "' has gaps in its recorded future");
        future.push_back(*s);
      }
      out.variants.push_back(future_variant(seg, target, "fut-gt", std::move(future)));
      break;
    }
    case GeneratorKind::kFutCvm: {
      const auto& cur = require_current(seg, *agent);
      out.variants.push_back(future_variant(seg, target, "fut-cvm", cvm_rollout(cur, future_horizon, dt)));
      break;
    }
    case GeneratorKind::kFutCvmLane: {
      const auto& cur = require_current(seg, *agent);
      Trajectory future = seg.source->lanes.empty()
                              ? cvm_rollout(cur, future_horizon, dt)
                              : lane_follow_rollout(cur, *closest_lane(cur.position(), *seg.source).lane,
                                                    future_horizon, dt);
      out.variants.push_back(future_variant(seg, target, "fut-cvm-l", std::move(future)));
      break;
    }
    case GeneratorKind::kFutPred: {
      if (!opts.predictor) throw ArgumentError("fut-pred requires a predictor");
      const auto& cur = require_current(seg, *agent);
      const int k = std::min(opts.max_variants, 15);
      const auto joint = opts.predictor->predict(seg, Condition::none(), k, opts.seed);
      const auto it = joint.find(target);
      if (it == joint.end()) throw GenerationError("predictor returned no modes for target '" + target + "'");
      std::vector<const GaussianMode*> modes;
      for (const auto& m : it->second.modes) modes.push_back(&m);
      std::stable_sort(modes.begin(), modes.end(),
                       [](const GaussianMode* a, const GaussianMode* b) { return a->weight > b->weight; });
      std::vector<const Eigen::VectorXd*> seen;
      for (const auto* m : modes) {
        if (static_cast<int>(out.variants.size()) >= opts.max_variants) break;
        if (std::any_of(seen.begin(), seen.end(), [&](const Eigen::VectorXd* v) { return *v == m->mean; })) continue;
        seen.push_back(&m->mean);
        if (m->mean.size() != 2 * seg.future_steps)
          throw GenerationError("predicted mode dimension differs from the future horizon");
        auto future = trajectory_from_positions(cur, std::span<const double>(m->mean.data(), m->mean.size()), dt);
        out.variants.push_back(
            future_variant(seg, target, "fut-pred:" + std::to_string(out.variants.size()), std::move(future)));
      }
      break;
    }
    case GeneratorKind::kFutPrim: {
      if (!opts.library) throw ArgumentError("fut-prim requires a primitive library");
      const auto& cur = require_current(seg, *agent);
      for (const auto* p : candidate_primitives(*opts.library, seg.future_steps, dt, seed)) {
        if (static_cast<int>(out.variants.size()) >= opts.max_variants) break;
        auto placed = place_primitive(*p, cur, Anchor::kFirst);
        Trajectory future(placed.begin() + 1, placed.end());
        if (!feasible(future, seg, target)) continue;
        out.variants.push_back(future_variant(seg, target, "fut-prim:" + p->id, std::move(future)));
      }
      if (out.variants.empty())
        throw GenerationError("no feasible future primitive for target '" + target + "' in scenario '" +
                              seg.scenario_id() + "'");
      break;
    }
    case GeneratorKind::kHistRmv: {
      Segment edited = seg;
      edited.variant_id = "hist-rmv";
      std::erase_if(edited.agents, [&](const SegmentAgent& a) { return a.id == target; });
      out.variants.push_back({"hist-rmv", std::move(edited), std::nullopt});
      break;
    }
    case GeneratorKind::kHistPrim: {
      if (!opts.library) throw ArgumentError("hist-prim requires a primitive library");
      const auto& cur = require_current(seg, *agent);
      for (const auto* p : candidate_primitives(*opts.library, seg.history_steps, dt, seed)) {
        if (static_cast<int>(out.variants.size()) >= opts.max_variants) break;
        auto placed = place_primitive(*p, cur, Anchor::kLast);
        Trajectory history(placed.begin() + 1, placed.end());
        if (!feasible(history, seg, target)) continue;
        Segment edited = seg;
        edited.variant_id = "hist-prim:" + p->id;
        SegmentAgent* a = edited.find(target);
        for (int k = 0; k < seg.history_steps; ++k)
          a->states[static_cast<std::size_t>(k)] = history[static_cast<std::size_t>(k)];
        out.variants.push_back({edited.variant_id, std::move(edited), std::nullopt});
      }
      if (out.variants.empty())
        throw GenerationError("no feasible history primitive for target '" + target + "' in scenario '" +
                              seg.scenario_id() + "'");
      break;
    }
  }
  return out;
}

}  // namespace surprise
