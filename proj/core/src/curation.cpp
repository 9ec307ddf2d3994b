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

#include "surprise/curation.hpp"

#include <cmath>
#include <limits>

#include "json_io.hpp"
#include "surprise/error.hpp"
#include "surprise/kinematics.hpp"
#include "surprise/surprise.hpp"

namespace surprise {

std::vector<Bucket> bucket_split(const Ranking& ranking, int num_buckets) {
  if (num_buckets < 1) throw ArgumentError("number of buckets must be at least 1");
  const std::size_t n = ranking.size();
  const auto b = static_cast<std::size_t>(num_buckets);
  if (n < b) throw ArgumentError("cannot split " + std::to_string(n) + " ids into " + std::to_string(b) + " buckets");
  std::vector<Bucket> out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t size = n / b + (k < n % b ? 1 : 0);
    Bucket bucket{static_cast<int>(k), {}};
    bucket.ids.assign(ranking.ids.begin() + static_cast<std::ptrdiff_t>(pos),
                      ranking.ids.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
    out.push_back(std::move(bucket));
  }
  return out;
}

SampleWeights upsample_weights(const Ranking& ranking, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive");
  SampleWeights w;
  w.tau = tau;
  const double n = static_cast<double>(ranking.size());
  double total = 0.0;
  for (const auto& id : ranking.ids) {
    const int r = ranking.rank.at(id);
    w.ids.push_back(id);
    w.ranks.push_back(r);
    w.raw.push_back(std::exp(-static_cast<double>(r) / (tau * n)));
    total += w.raw.back();
  }
  for (const double x : w.raw) w.normalized.push_back(x / total);
  return w;
}

void SampleWeights::save(const std::filesystem::path& path) const {
  auto out = detail::open_for_write(path);
  out << "scenario_id,rank,weight,weight_normalized\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << ids[i] << ',' << ranks[i] << ',' << detail::format_double(raw[i]) << ','
        << detail::format_double(normalized[i]) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

namespace {

const SegmentAgent& ego_of(const Segment& seg) {
  const SegmentAgent* ego = seg.find(seg.ego_id());
  if (!ego) throw DataError("ego '" + seg.ego_id() + "' is absent from scenario '" + seg.scenario_id() + "'");
  if (!seg.current(*ego)) throw DataError("ego is not observed at the split of scenario '" + seg.scenario_id() + "'");
  return *ego;
}

}  // namespace

Trajectory rule_planner(const Segment& seg) {
  const AgentState& cur = *seg.current(ego_of(seg));
  const double horizon = seg.future_steps * seg.dt();
  if (seg.source->lanes.empty()) return cvm_rollout(cur, horizon, seg.dt());
  return lane_follow_rollout(cur, *closest_lane(cur.position(), *seg.source).lane, horizon, seg.dt());
}

Trajectory PredictionPlanner::plan(const Segment& seg) const {
  const SegmentAgent& ego = ego_of(seg);
  const auto joint = predictor_.predict(seg, Condition::none(), num_modes_, 0);
  const auto it = joint.find(ego.id);
  if (it == joint.end() || it->second.modes.empty()) throw DataError("predictor has no ego modes");
  const GaussianMode* top = &it->second.modes.front();
  for (const auto& m : it->second.modes)
    if (m.weight > top->weight) top = &m;
  return trajectory_from_positions(*seg.current(ego),
                                   std::span<const double>(top->mean.data(), static_cast<std::size_t>(top->mean.size())),
                                   seg.dt());
}

ExternalPlanner ExternalPlanner::load(const std::filesystem::path& path) {
  std::map<std::string, std::vector<Vec2>> plans;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    try {
      const auto j = detail::json::parse(line);
      const std::string id = detail::require_string(j, "scenario_id");
      std::vector<Vec2> pts;
      for (const auto& p : detail::require(j, "plan")) {
        const auto xy = p.get<std::vector<double>>();
        if (xy.size() != 2) throw DataError("plan points need 2 coordinates");
        pts.push_back({xy[0], xy[1]});
      }
      if (!plans.emplace(id, std::move(pts)).second) throw DataError("duplicate plan for scenario '" + id + "'");
    } catch (const detail::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return ExternalPlanner(path.stem().string(), std::move(plans));
}

Trajectory ExternalPlanner::plan(const Segment& seg) const {
  const auto it = plans_.find(seg.scenario_id());
  if (it == plans_.end()) throw DataError("no external plan for scenario '" + seg.scenario_id() + "'");
  if (static_cast<int>(it->second.size()) != seg.future_steps)
    throw DataError("external plan for scenario '" + seg.scenario_id() + "' has " + std::to_string(it->second.size()) +
                    " points, expected " + std::to_string(seg.future_steps));
  std::vector<double> flat;
  for (const auto& p : it->second) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return trajectory_from_positions(*seg.current(ego_of(seg)), flat, seg.dt());
}

PlanMetrics plan_metrics(std::span<const AgentState> plan, const Segment& seg, double disc_scale) {
  if (static_cast<int>(plan.size()) != seg.future_steps)
    throw ArgumentError("plan length " + std::to_string(plan.size()) + " differs from the " +
                        std::to_string(seg.future_steps) + " future steps");
  const SegmentAgent& ego = ego_of(seg);
  const auto recorded = seg.future(ego);
  PlanMetrics m;
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (!recorded[k]) continue;
    const double e = (plan[k].position() - recorded[k]->position()).norm();
    sum += e;
    ++n;
    m.fde = e;
  }
  if (n == 0) throw DataError("ego has no recorded future in scenario '" + seg.scenario_id() + "'");
  m.ade = sum / n;
  const double r_ego = disc_radius(ego, disc_scale);
  for (const auto& other : seg.agents) {
    if (other.id == ego.id) continue;
    const auto fut = seg.future(other);
    const double reach = r_ego + disc_radius(other, disc_scale);
    for (std::size_t k = 0; k < plan.size() && m.collision == 0.0; ++k)
      if (fut[k] && (plan[k].position() - fut[k]->position()).norm() <= reach) m.collision = 1.0;
  }
  m.ttc = ttc_with_plan(seg, plan, disc_scale);
  return m;
}

BucketEvaluation evaluate_planner(const Planner& planner, const Bucket& bucket,
                                  const std::map<std::string, ScenarioPtr>& data) {
  if (bucket.ids.empty()) throw ArgumentError("bucket " + std::to_string(bucket.index) + " is empty");
  BucketEvaluation ev;
  ev.bucket = bucket.index;
  ev.planner = planner.name();
  double sum = 0.0;
  double sum_real = 0.0;
  for (const auto& id : bucket.ids) {
    const auto it = data.find(id);
    if (it == data.end()) throw DataError("bucket id '" + id + "' is not in the dataset");
    const Segment seg = default_segment(it->second);
    const double t = ttc_with_plan(seg, planner.plan(seg));
    sum += t;
    if (t >= ttc_sentinel(seg)) {
      ++ev.n_sentinel;
    } else {
      sum_real += t;
    }
    ++ev.n;
  }
  ev.mean_ttc = sum / static_cast<double>(ev.n);
  const std::size_t real = ev.n - ev.n_sentinel;
  ev.mean_ttc_excluding_sentinel = real > 0 ? sum_real / static_cast<double>(real)
                                            : std::numeric_limits<double>::quiet_NaN();
  return ev;
}

void save_bucket_report(const std::filesystem::path& path, const std::vector<BucketEvaluation>& rows) {
  auto out = detail::open_for_write(path);
  out << "bucket,planner,mean_ttc,mean_ttc_excluding_sentinel,n\n";
  for (const auto& r : rows)
    out << r.bucket << ',' << r.planner << ',' << detail::format_double(r.mean_ttc) << ','
        << detail::format_double(r.mean_ttc_excluding_sentinel) << ',' << r.n << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::map<std::string, ScenarioPtr> index_by_id(const ScenarioSet& data) {
  std::map<std::string, ScenarioPtr> out;
  for (const auto& s : data) out.emplace(s->scenario_id, s);
  return out;
}

}  // namespace surprise
