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

#include <algorithm>
#include <cmath>
#include <limits>

#include "surprise/error.hpp"
#include "surprise/kinematics.hpp"
#include "surprise/surprise.hpp"

namespace surprise {

namespace {

const AgentState& ego_current(const Segment& seg, const SegmentAgent*& ego) {
  ego = seg.find(seg.ego_id());
  if (!ego) throw DataError("ego '" + seg.ego_id() + "' is absent from scenario '" + seg.scenario_id() + "'");
  const auto& cur = seg.current(*ego);
  if (!cur) throw DataError("ego is not observed at the split of scenario '" + seg.scenario_id() + "'");
  return *cur;
}

std::vector<std::optional<AgentState>> cv_line(const AgentState& s, double horizon) {
  AgentState end = s;
  end.t = s.t + horizon;
  end.x = s.x + horizon * s.vx;
  end.y = s.y + horizon * s.vy;
  return {s, end};
}

double ade(std::span<const AgentState> plan, std::span<const std::optional<AgentState>> recorded) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < plan.size() && k < recorded.size(); ++k) {
    if (!recorded[k]) continue;
    sum += (plan[k].position() - recorded[k]->position()).norm();
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

double disc_radius(const SegmentAgent& a, double scale) { return scale * 0.5 * std::hypot(a.length, a.width); }

double ttc_sentinel(const Segment& seg) { return seg.future_steps * seg.dt() + seg.dt(); }

std::optional<double> first_contact(std::span<const std::optional<AgentState>> a,
                                    std::span<const std::optional<AgentState>> b, double radius_sum) {
  const std::size_t n = std::min(a.size(), b.size());
  const double r2 = radius_sum * radius_sum;
  for (std::size_t k = 0; k < n; ++k) {
    if (!a[k] || !b[k]) continue;
    const Vec2 r0 = a[k]->position() - b[k]->position();
    if (r0.squared_norm() <= r2) return a[k]->t;
    if (k + 1 >= n || !a[k + 1] || !b[k + 1]) continue;
    const Vec2 d = (a[k + 1]->position() - b[k + 1]->position()) - r0;
    const double qa = d.squared_norm();
    if (qa == 0.0) continue;
    const double qb = 2.0 * r0.dot(d);
    const double qc = r0.squared_norm() - r2;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    // Numerically stable smaller root of qa s^2 + qb s + qc.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    double s0 = q / qa;
    double s1 = q != 0.0 ? qc / q : s0;
    if (s0 > s1) std::swap(s0, s1);
    if (s0 >= 0.0 && s0 <= 1.0) return a[k]->t + s0 * (a[k + 1]->t - a[k]->t);
  }
  return std::nullopt;
}

double ttc(const Segment& seg, double disc_scale) {
  const SegmentAgent* ego = nullptr;
  const AgentState& e = ego_current(seg, ego);
  const double horizon = seg.future_steps * seg.dt();
  const auto ego_line = cv_line(e, horizon);
  double best = ttc_sentinel(seg);
  for (const auto& other : seg.agents) {
    if (other.id == ego->id) continue;
    const auto& cur = seg.current(other);
    if (!cur) continue;
    const auto hit =
        first_contact(ego_line, cv_line(*cur, horizon), disc_radius(*ego, disc_scale) + disc_radius(other, disc_scale));
    if (hit) best = std::min(best, *hit - e.t);
  }
  return best;
}

double ttce(const Segment& seg) {
  const SegmentAgent* ego = nullptr;
  const AgentState& e = ego_current(seg, ego);
  const double horizon = seg.future_steps * seg.dt();
  double best_t = ttc_sentinel(seg);
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& other : seg.agents) {
    if (other.id == ego->id) continue;
    const auto& cur = seg.current(other);
    if (!cur) continue;
    const Vec2 r0 = cur->position() - e.position();
    const Vec2 w = cur->velocity() - e.velocity();
    const double ww = w.squared_norm();
    const double t = ww > 0.0 ? std::clamp(-r0.dot(w) / ww, 0.0, horizon) : 0.0;
    const double d = (r0 + w * t).norm();
    if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && t < best_t)) {
      best_d = d;
      best_t = t;
    }
  }
  return best_t;
}

double ttc_with_plan(const Segment& seg, std::span<const AgentState> plan, double disc_scale) {
  if (static_cast<int>(plan.size()) != seg.future_steps)
    throw ArgumentError("plan length " + std::to_string(plan.size()) + " differs from the " +
                        std::to_string(seg.future_steps) + " future steps");
  const SegmentAgent* ego = nullptr;
  const AgentState& e = ego_current(seg, ego);
  std::vector<std::optional<AgentState>> ego_path{e};
  ego_path.insert(ego_path.end(), plan.begin(), plan.end());
  double best = ttc_sentinel(seg);
  for (const auto& other : seg.agents) {
    if (other.id == ego->id) continue;
    std::vector<std::optional<AgentState>> path{seg.current(other)};
    const auto fut = seg.future(other);
    path.insert(path.end(), fut.begin(), fut.end());
    const auto hit =
        first_contact(ego_path, path, disc_radius(*ego, disc_scale) + disc_radius(other, disc_scale));
    if (hit) best = std::min(best, *hit - e.t);
  }
  return best;
}

std::map<std::string, double> rule_scores(const Segment& seg, const Predictor& predictor, const RuleConfig& cfg) {
  const SegmentAgent* ego = nullptr;
  const AgentState& e = ego_current(seg, ego);
  const double dt = seg.dt();
  const std::size_t window = static_cast<std::size_t>(seg.window_size());

  double max_speed = 0.0;
  double max_accel = 0.0;
  for (const auto& a : seg.agents) {
    for (std::size_t k = 0; k < window; ++k) {
      if (!a.states[k]) continue;
      max_speed = std::max(max_speed, a.states[k]->speed());
      if (k + 1 < window && a.states[k + 1])
        max_accel = std::max(max_accel, (a.states[k + 1]->velocity() - a.states[k]->velocity()).norm() / dt);
    }
  }

  double min_dist = std::numeric_limits<double>::infinity();
  int max_count = 0;
  for (std::size_t k = 0; k < window; ++k) {
    if (!ego->states[k]) continue;
    int count = 0;
    for (const auto& a : seg.agents) {
      if (a.id == ego->id || !a.states[k]) continue;
      const double d = (a.states[k]->position() - ego->states[k]->position()).norm();
      min_dist = std::min(min_dist, d);
      if (d <= cfg.neighbour_radius) ++count;
    }
    max_count = std::max(max_count, count);
  }
  if (!std::isfinite(min_dist)) min_dist = cfg.no_neighbour_distance;

  const double horizon = seg.future_steps * dt;
  const Trajectory lane_plan =
      seg.source->lanes.empty()
          ? cvm_rollout(e, horizon, dt)
          : lane_follow_rollout(e, *closest_lane(e.position(), *seg.source).lane, horizon, dt);
  const double lane_ade = ade(lane_plan, seg.future(*ego));

  const auto joint = predictor.predict(seg, Condition::none(), cfg.num_modes, 0);
  double err_sum = 0.0;
  int err_n = 0;
  for (const auto& [id, g] : joint) {
    const SegmentAgent* a = seg.find(id);
    if (!a || g.modes.empty()) continue;
    const auto fut = seg.future(*a);
    if (std::none_of(fut.begin(), fut.end(), [](const auto& s) { return s.has_value(); })) continue;
    const auto top = std::max_element(g.modes.begin(), g.modes.end(), [](const GaussianMode& x, const GaussianMode& y) {
      return x.weight < y.weight;
    });
    const auto plan = trajectory_from_positions(
        *seg.current(*a), std::span<const double>(top->mean.data(), static_cast<std::size_t>(top->mean.size())), dt);
    err_sum += ade(plan, fut);
    ++err_n;
  }

  return {{"rule-vel", max_speed},
          {"rule-acc", max_accel},
          {"rule-dist", -min_dist},
          {"rule-num", static_cast<double>(max_count)},
          {"rule-ttc", -ttc(seg, cfg.disc_scale)},
          {"rule-ttce", -ttce(seg)},
          {"rule-lane", lane_ade},
          {"rule-err", err_n > 0 ? err_sum / err_n : 0.0}};
}

}  // namespace surprise
