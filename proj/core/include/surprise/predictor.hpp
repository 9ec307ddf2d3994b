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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "surprise/scenario.hpp"

namespace surprise {

/// One component of a mixture over a flattened future (x1, y1, ..., xT, yT).
struct GaussianMode {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  bool operator==(const GaussianMode& o) const {
    return weight == o.weight && mean.size() == o.mean.size() && mean == o.mean &&
           covariance.rows() == o.covariance.rows() && covariance.cols() == o.covariance.cols() &&
           covariance == o.covariance;
  }
};

struct GmmPrediction {
  std::string agent_id;
  std::vector<GaussianMode> modes;

  Eigen::Index dimension() const { return modes.empty() ? 0 : modes.front().mean.size(); }
  bool operator==(const GmmPrediction&) const = default;
};

/// Per-agent marginal predictions keyed (and ordered) by agent id.
using JointPrediction = std::map<std::string, GmmPrediction>;

/// Checks the mixture invariants: K >= 1, shared dimension, finite means,
/// weights in [0, 1] summing to 1 within 1e-9, symmetric PSD covariances.
/// Throws DataError.
void validate_gmm(const GmmPrediction& g);

/// Optional fixed future for one agent; the predictor conditions on it and
/// leaves that agent out of its output.
struct Condition {
  std::optional<std::string> target_id;
  Trajectory trajectory;

  static Condition none() { return {}; }
  static Condition on(std::string target, Trajectory traj) { return {std::move(target), std::move(traj)}; }
  bool active() const { return target_id.has_value(); }
};

/// "none" for an inactive condition, otherwise the 64-bit FNV-1a hash (16
/// lowercase hex digits) of the condition positions rounded to 1e-3 and
/// written as "x,y,x,y,...".
std::string condition_key(const Condition& cond);

/// Future-prediction function over segments.
class Predictor {
 public:
  virtual ~Predictor() = default;

  /// One GmmPrediction per agent observed at the split, except a conditioned
  /// target. `num_modes` in [1, 15].
  virtual JointPrediction predict(const Segment& seg, const Condition& cond, int num_modes,
                                  std::uint64_t seed) const = 0;
};

enum class HypothesisKind { kConstantVelocity, kLaneFollow, kBrake, kAccelerate };

std::string_view to_string(HypothesisKind kind);

struct ReferencePredictorConfig {
  double brake_accel = -3.0;       // m/s^2
  double accelerate_accel = 1.5;   // m/s^2
  double prior_cv = 0.4;
  double prior_lane = 0.3;
  double prior_brake = 0.2;
  double prior_accelerate = 0.1;
  double sigma0 = 0.25;            // m, per-step std grows as sigma0 * k
  double conflict_radius = 4.0;    // m
  double conflict_time = 2.0;      // s
  double interaction_radius = 30.0;  // m
  double brake_boost = 3.0;
  double lane_snap_distance = 3.0;  // m, farther agents fall back to CV
};

/// One kinematic behaviour hypothesis for an agent.
struct Hypothesis {
  HypothesisKind kind = HypothesisKind::kConstantVelocity;
  double weight = 0.0;
  Trajectory trajectory;  // future steps 1..T
  bool replaced_by_brake = false;
};

/// Deterministic interaction-aware kinematic predictor. Each agent gets four
/// hypotheses (constant velocity, lane follow, brake, accelerate). A
/// hypothesis that reaches a point within `conflict_radius` of where a
/// neighbour was at most `conflict_time` earlier is swapped for the braking
/// response and the brake weight is boosted. Neighbours beyond
/// `interaction_radius` at the split are ignored; a conditioned neighbour
/// follows its condition, every other neighbour its constant-velocity future.
class ReferencePredictor final : public Predictor {
 public:
  explicit ReferencePredictor(ReferencePredictorConfig cfg = {}) : cfg_(cfg) {}

  JointPrediction predict(const Segment& seg, const Condition& cond, int num_modes,
                          std::uint64_t seed) const override;

  /// Hypotheses for one agent, normalised, in fixed kind order.
  std::vector<Hypothesis> reference_modes(const SegmentAgent& agent, const Segment& seg,
                                          const Condition& cond) const;

  /// Adapts hypotheses to exactly `num_modes` Gaussian modes.
  GmmPrediction to_gmm(const std::string& agent_id, const std::vector<Hypothesis>& hyps, int num_modes) const;

  const ReferencePredictorConfig& config() const { return cfg_; }

 private:
  ReferencePredictorConfig cfg_;
};

struct CacheWarning {
  std::size_t line = 0;
  std::string message;
};

/// Externally computed predictions keyed by (scenario, variant, condition).
class PredictionCache {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;

  /// Reads the line-delimited cache format. Mixtures whose weights do not sum
  /// to 1 are renormalised and reported in warnings(). Throws DataError.
  static PredictionCache load(const std::filesystem::path& path);

  void insert(const std::string& scenario_id, const std::string& variant_id, const std::string& cond_key,
              GmmPrediction prediction);
  /// Throws DataError on a missing key.
  const JointPrediction& lookup(const std::string& scenario_id, const std::string& variant_id,
                                const std::string& cond_key) const;
  bool contains(const std::string& scenario_id, const std::string& variant_id, const std::string& cond_key) const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<CacheWarning>& warnings() const { return warnings_; }

 private:
  std::map<Key, JointPrediction> entries_;
  std::vector<CacheWarning> warnings_;
};

inline PredictionCache load_external(const std::filesystem::path& path) { return PredictionCache::load(path); }

/// Strict lookup; never falls back to another predictor.
JointPrediction cached_predict(const PredictionCache& cache, const std::string& scenario_id,
                               const std::string& variant_id, const std::string& cond_key);

/// Predictor backed by a cache; segment variant ids select the entry.
class CachedPredictor final : public Predictor {
 public:
  explicit CachedPredictor(std::shared_ptr<const PredictionCache> cache) : cache_(std::move(cache)) {}

  /// Throws DataError on a missing entry or when a mode dimension differs from
  /// twice the segment's future steps.
  JointPrediction predict(const Segment& seg, const Condition& cond, int num_modes,
                          std::uint64_t seed) const override;

 private:
  std::shared_ptr<const PredictionCache> cache_;
};

/// Forwards to another predictor and records every answer into a cache.
class RecordingPredictor final : public Predictor {
 public:
  explicit RecordingPredictor(const Predictor& inner) : inner_(inner) {}

  JointPrediction predict(const Segment& seg, const Condition& cond, int num_modes,
                          std::uint64_t seed) const override;

  PredictionCache snapshot() const;

 private:
  const Predictor& inner_;
  mutable std::mutex mutex_;
  mutable PredictionCache recorded_;
};

}  // namespace surprise
