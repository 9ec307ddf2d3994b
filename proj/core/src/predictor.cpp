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

#include "surprise/predictor.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "json_io.hpp"
#include "surprise/error.hpp"
#include "surprise/kinematics.hpp"

namespace surprise {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kTimeTolerance = 1e-9;

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

// Appends the rounded decimal text of `v` at 1e-3 resolution.
void append_rounded(std::string& out, double v) {
  const long long milli = std::llround(v * 1000.0);
  const unsigned long long mag = static_cast<unsigned long long>(milli < 0 ? -milli : milli);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%llu.%03llu", milli < 0 ? "-" : "", mag / 1000ULL, mag % 1000ULL);
  out += buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Eigen::MatrixXd step_covariance(int steps, double sigma0) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * steps, 2 * steps);
  for (int k = 1; k <= steps; ++k) {
    const double sigma = sigma0 * k;
    cov(2 * (k - 1), 2 * (k - 1)) = sigma * sigma;
    cov(2 * (k - 1) + 1, 2 * (k - 1) + 1) = sigma * sigma;
  }
  return cov;
}

// Positions a neighbour is expected to occupy from the split onwards.
struct NeighbourPath {
  Vec2 anchor;
  Trajectory states;  // includes the split state when observed
};

bool in_conflict(const Trajectory& hyp, const NeighbourPath& other, double radius, double window) {
  for (const auto& a : hyp) {
    for (const auto& b : other.states) {
      const double lag = a.t - b.t;
      if (lag < -kTimeTolerance || lag > window + kTimeTolerance) continue;
      if ((a.position() - b.position()).norm() <= radius) return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(HypothesisKind kind) {
  switch (kind) {
    case HypothesisKind::kConstantVelocity:
      return "constant-velocity";
    case HypothesisKind::kLaneFollow:
      return "lane-follow";
    case HypothesisKind::kBrake:
      return "brake";
    case HypothesisKind::kAccelerate:
      return "accelerate";
  }
  return "constant-velocity";
}

void validate_gmm(const GmmPrediction& g) {
  const std::string who = "prediction for agent '" + g.agent_id + "'";
  if (g.modes.empty()) throw DataError(who + " has no modes");
  const Eigen::Index dim = g.modes.front().mean.size();
  double total = 0.0;
  for (const auto& m : g.modes) {
    if (m.mean.size() != dim) throw DataError(who + " mixes mode dimensions");
    if (!m.mean.allFinite()) throw DataError(who + " has a non-finite mean");
    if (!(m.weight >= 0.0 && m.weight <= 1.0)) throw DataError(who + " has a weight outside [0, 1]");
    if (m.covariance.rows() != dim || m.covariance.cols() != dim)
      throw DataError(who + " has a covariance of the wrong size");
    if ((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw DataError(who + " has an asymmetric covariance");
    if (dim > 0 && !is_diagonal(m.covariance)) {
      if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.covariance, Eigen::EigenvaluesOnly)
              .eigenvalues()
              .minCoeff() < -1e-9)
        throw DataError(who + " has a covariance that is not PSD");
    } else if (dim > 0 && m.covariance.diagonal().minCoeff() < -1e-9) {
      throw DataError(who + " has a covariance that is not PSD");
    }
    total += m.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw DataError(who + " weights do not sum to 1");
}

std::string condition_key(const Condition& cond) {
  if (!cond.active()) return "none";
  std::string text;
  for (std::size_t i = 0; i < cond.trajectory.size(); ++i) {
    if (i) text += ',';
    append_rounded(text, cond.trajectory[i].x);
    text += ',';
    append_rounded(text, cond.trajectory[i].y);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(text));
  return buf;
}

// ---------------------------------------------------------------------------
// Reference predictor

std::vector<Hypothesis> ReferencePredictor::reference_modes(const SegmentAgent& agent, const Segment& seg,
                                                            const Condition& cond) const {
  const auto& cur_opt = seg.current(agent);
  if (!cur_opt) throw ArgumentError("agent '" + agent.id + "' is not observed at the split");
  const AgentState& cur = *cur_opt;
  const double dt = seg.dt();
  const double horizon = seg.future_steps * dt;

  std::vector<Hypothesis> hyps(4);
  hyps[0] = {HypothesisKind::kConstantVelocity, cfg_.prior_cv, cvm_rollout(cur, horizon, dt), false};
  Trajectory lane_traj;
  if (!seg.source->lanes.empty()) {
    const auto match = closest_lane(cur.position(), *seg.source);
    if (match.distance <= cfg_.lane_snap_distance) lane_traj = lane_follow_rollout(cur, *match.lane, horizon, dt);
  }
  if (lane_traj.empty()) lane_traj = hyps[0].trajectory;
  hyps[1] = {HypothesisKind::kLaneFollow, cfg_.prior_lane, std::move(lane_traj), false};
  hyps[2] = {HypothesisKind::kBrake, cfg_.prior_brake, accel_rollout(cur, cfg_.brake_accel, horizon, dt), false};
  hyps[3] = {HypothesisKind::kAccelerate, cfg_.prior_accelerate,
             accel_rollout(cur, cfg_.accelerate_accel, horizon, dt), false};

  std::vector<NeighbourPath> neighbours;
  for (const auto& other : seg.agents) {
    if (other.id == agent.id) continue;
    const auto& other_cur = seg.current(other);
    NeighbourPath path;
    if (cond.active() && other.id == *cond.target_id) {
      if (other_cur) path.states.push_back(*other_cur);
      path.states.insert(path.states.end(), cond.trajectory.begin(), cond.trajectory.end());
      if (path.states.empty()) continue;
    } else {
      if (!other_cur) continue;
      path.states.push_back(*other_cur);
      const auto future = cvm_rollout(*other_cur, horizon, dt);
      path.states.insert(path.states.end(), future.begin(), future.end());
    }
    path.anchor = path.states.front().position();
    if ((path.anchor - cur.position()).norm() > cfg_.interaction_radius) continue;
    neighbours.push_back(std::move(path));
  }

  const Trajectory brake = hyps[2].trajectory;
  bool any_conflict = false;
  for (auto& h : hyps) {
    const bool conflict = std::any_of(neighbours.begin(), neighbours.end(), [&](const NeighbourPath& n) {
      return in_conflict(h.trajectory, n, cfg_.conflict_radius, cfg_.conflict_time);
    });
    if (conflict) {
      h.trajectory = brake;
      h.replaced_by_brake = true;
      any_conflict = true;
    }
  }
  if (any_conflict) hyps[2].weight *= cfg_.brake_boost;

  const double total = std::accumulate(hyps.begin(), hyps.end(), 0.0,
                                       [](double acc, const Hypothesis& h) { return acc + h.weight; });
  for (auto& h : hyps) h.weight /= total;
  return hyps;
}

GmmPrediction ReferencePredictor::to_gmm(const std::string& agent_id, const std::vector<Hypothesis>& hyps,
                                         int num_modes) const {
  const int n = static_cast<int>(hyps.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return hyps[a].weight > hyps[b].weight; });

  std::vector<int> copies(static_cast<std::size_t>(n), 0);
  if (num_modes <= n) {
    for (int i = 0; i < num_modes; ++i) copies[order[i]] = 1;
  } else {
    for (int i = 0; i < n; ++i) copies[order[i]] = num_modes / n + (i < num_modes % n ? 1 : 0);
  }
  double kept = 0.0;
  for (int i = 0; i < n; ++i)
    if (copies[i] > 0) kept += hyps[i].weight;

  const int steps = hyps.empty() ? 0 : static_cast<int>(hyps.front().trajectory.size());
  const Eigen::MatrixXd cov = step_covariance(steps, cfg_.sigma0);
  GmmPrediction g;
  g.agent_id = agent_id;
  for (const int idx : order) {
    const auto& h = hyps[idx];
    if (copies[idx] == 0) continue;
    const auto flat = flatten_positions(h.trajectory);
    const Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
    const double w = num_modes <= n ? h.weight / kept : h.weight / copies[idx];
    for (int c = 0; c < copies[idx]; ++c) g.modes.push_back({w, mean, cov});
  }
  return g;
}

JointPrediction ReferencePredictor::predict(const Segment& seg, const Condition& cond, int num_modes,
                                            std::uint64_t /*seed*/) const {
  if (num_modes < 1 || num_modes > 15) throw ArgumentError("number of modes must lie in [1, 15]");
  if (cond.active()) {
    if (!seg.find(*cond.target_id))
      throw DataError("conditioned agent '" + *cond.target_id + "' is absent from segment of scenario '" +
                      seg.scenario_id() + "'");
    if (static_cast<int>(cond.trajectory.size()) != seg.future_steps)
      throw ArgumentError("condition trajectory length differs from the prediction horizon");
  }
  JointPrediction out;
  for (const auto& agent : seg.agents) {
    if (cond.active() && agent.id == *cond.target_id) continue;
    if (!seg.current(agent)) continue;
    out.emplace(agent.id, to_gmm(agent.id, reference_modes(agent, seg, cond), num_modes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction cache

PredictionCache PredictionCache::load(const std::filesystem::path& path) {
  PredictionCache cache;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    const std::string where = path.string() + ":" + std::to_string(number) + ": ";
    try {
      const auto j = detail::json::parse(line);
      const std::string scenario = detail::require_string(j, "scenario_id");
      const std::string variant = detail::require_string(j, "variant_id");
      const std::string key = detail::require_string(j, "cond_key");
      GmmPrediction g;
      g.agent_id = detail::require_string(j, "agent_id");
      for (const auto& jm : detail::require(j, "modes")) {
        GaussianMode m;
        m.weight = detail::require_number(jm, "pi");
        const auto mean = detail::require(jm, "mean").get<std::vector<double>>();
        m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        const auto dim = m.mean.size();
        if (const auto it = jm.find("cov_diag"); it != jm.end()) {
          const auto diag = it->get<std::vector<double>>();
          if (static_cast<Eigen::Index>(diag.size()) != dim) throw DataError("cov_diag length differs from mean");
          m.covariance = Eigen::MatrixXd::Zero(dim, dim);
          for (Eigen::Index i = 0; i < dim; ++i) m.covariance(i, i) = diag[static_cast<std::size_t>(i)];
        } else if (const auto it2 = jm.find("cov"); it2 != jm.end()) {
          const auto rows = it2->get<std::vector<std::vector<double>>>();
          if (static_cast<Eigen::Index>(rows.size()) != dim) throw DataError("cov row count differs from mean");
          m.covariance.resize(dim, dim);
          for (Eigen::Index r = 0; r < dim; ++r) {
            if (static_cast<Eigen::Index>(rows[r].size()) != dim) throw DataError("cov is not square");
            for (Eigen::Index c = 0; c < dim; ++c) m.covariance(r, c) = rows[r][c];
          }
        } else {
          throw DataError("mode needs cov_diag or cov");
        }
        if (m.weight < 0.0) throw DataError("negative mode weight");
        g.modes.push_back(std::move(m));
      }
      if (g.modes.empty()) throw DataError("prediction has no modes");
      double total = 0.0;
      for (const auto& m : g.modes) total += m.weight;
      if (!(total > 0.0)) throw DataError("mode weights sum to zero");
      if (std::abs(total - 1.0) > kWeightTolerance) {
        for (auto& m : g.modes) m.weight /= total;
        cache.warnings_.push_back({number, "weights of agent '" + g.agent_id + "' summed to " +
                                               detail::format_double(total) + "; renormalised"});
      }
      for (auto& m : g.modes) {
        if (m.covariance.rows() > 0 && (m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
          throw DataError("asymmetric covariance");
        if (is_diagonal(m.covariance)) {
          if (m.covariance.diagonal().minCoeff() < -1e-9) throw DataError("covariance is not PSD");
          for (Eigen::Index i = 0; i < m.covariance.rows(); ++i)
            m.covariance(i, i) = std::max(0.0, m.covariance(i, i));
          continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariance);
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < -1e-9) throw DataError("covariance is not PSD");
        if (min_eig < 0.0) {
          const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
          m.covariance = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
        }
      }
      validate_gmm(g);
      auto& joint = cache.entries_[{scenario, variant, key}];
      const std::string agent = g.agent_id;
      if (!joint.emplace(agent, std::move(g)).second) throw DataError("duplicate entry for agent '" + agent + "'");
    } catch (const detail::json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  });
  return cache;
}

void PredictionCache::insert(const std::string& scenario_id, const std::string& variant_id,
                             const std::string& cond_key, GmmPrediction prediction) {
  auto& joint = entries_[{scenario_id, variant_id, cond_key}];
  const std::string agent = prediction.agent_id;
  joint.insert_or_assign(agent, std::move(prediction));
}

const JointPrediction& PredictionCache::lookup(const std::string& scenario_id, const std::string& variant_id,
                                               const std::string& cond_key) const {
  const auto it = entries_.find({scenario_id, variant_id, cond_key});
  if (it == entries_.end())
    throw DataError("prediction cache has no entry for scenario '" + scenario_id + "', variant '" + variant_id +
                    "', condition '" + cond_key + "'");
  return it->second;
}

bool PredictionCache::contains(const std::string& scenario_id, const std::string& variant_id,
                               const std::string& cond_key) const {
  return entries_.contains({scenario_id, variant_id, cond_key});
}

void PredictionCache::save(const std::filesystem::path& path) const {
  using detail::json;
  auto out = detail::open_for_write(path);
  for (const auto& [key, joint] : entries_) {
    for (const auto& [agent, g] : joint) {
      json modes = json::array();
      for (const auto& m : g.modes) {
        json jm{{"pi", m.weight}, {"mean", std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size())}};
        if (is_diagonal(m.covariance)) {
          const Eigen::VectorXd d = m.covariance.diagonal();
          jm["cov_diag"] = std::vector<double>(d.data(), d.data() + d.size());
        } else {
          json rows = json::array();
          for (Eigen::Index r = 0; r < m.covariance.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.covariance.cols(); ++c) row.push_back(m.covariance(r, c));
            rows.push_back(std::move(row));
          }
          jm["cov"] = std::move(rows);
        }
        modes.push_back(std::move(jm));
      }
      json line{{"scenario_id", std::get<0>(key)},
                {"variant_id", std::get<1>(key)},
                {"cond_key", std::get<2>(key)},
                {"agent_id", agent},
                {"modes", std::move(modes)}};
      out << line.dump() << '\n';
    }
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

JointPrediction cached_predict(const PredictionCache& cache, const std::string& scenario_id,
                               const std::string& variant_id, const std::string& cond_key) {
  return cache.lookup(scenario_id, variant_id, cond_key);
}

JointPrediction CachedPredictor::predict(const Segment& seg, const Condition& cond, int /*num_modes*/,
                                         std::uint64_t /*seed*/) const {
  JointPrediction joint = cache_->lookup(seg.scenario_id(), seg.variant_id, condition_key(cond));
  const Eigen::Index expected = 2 * seg.future_steps;
  for (const auto& [agent, g] : joint)
    if (g.dimension() != expected)
      throw DataError("cached prediction for agent '" + agent + "' in scenario '" + seg.scenario_id() +
                      "' has dimension " + std::to_string(g.dimension()) + ", expected " + std::to_string(expected));
  return joint;
}

JointPrediction RecordingPredictor::predict(const Segment& seg, const Condition& cond, int num_modes,
                                            std::uint64_t seed) const {
  JointPrediction joint = inner_.predict(seg, cond, num_modes, seed);
  const std::string key = condition_key(cond);
  std::lock_guard lock(mutex_);
  for (const auto& [agent, g] : joint) recorded_.insert(seg.scenario_id(), seg.variant_id, key, g);
  return joint;
}

PredictionCache RecordingPredictor::snapshot() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

}  // namespace surprise
