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

// Downstream uses of a ranking: buckets, sampling weights and planner checks.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "surprise/eval_rank.hpp"
#include "surprise/predictor.hpp"
#include "surprise/scenario.hpp"

namespace surprise {

struct Bucket {
  int index = 0;  // 0 holds the best-ranked ids
  std::vector<std::string> ids;
};

/// Contiguous rank slices; the first N mod B buckets get one extra id.
/// Throws ArgumentError when B < 1 or N < B.
std::vector<Bucket> bucket_split(const Ranking& ranking, int num_buckets);

struct SampleWeights {
  double tau = 1.0;
  std::vector<std::string> ids;  // rank order
  std::vector<int> ranks;        // 1-based
  std::vector<double> raw;       // exp(-r / (tau N))
  std::vector<double> normalized;

  /// CSV scenario_id,rank,weight,weight_normalized.
  void save(const std::filesystem::path& path) const;
};

SampleWeights upsample_weights(const Ranking& ranking, double tau);

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string name() const = 0;
  /// Ego positions for future steps 1..F.
  virtual Trajectory plan(const Segment& seg) const = 0;
};

/// Keeps the current lane and speed (constant velocity without lanes).
Trajectory rule_planner(const Segment& seg);

class RulePlanner final : public Planner {
 public:
  std::string name() const override { return "rule"; }
  Trajectory plan(const Segment& seg) const override { return rule_planner(seg); }
};

/// Top-weight ego mode of an unconditional prediction.
class PredictionPlanner final : public Planner {
 public:
  explicit PredictionPlanner(const Predictor& predictor, int num_modes = 6)
      : predictor_(predictor), num_modes_(num_modes) {}
  std::string name() const override { return "predictor"; }
  Trajectory plan(const Segment& seg) const override;

 private:
  const Predictor& predictor_;
  int num_modes_;
};

/// Plans read from a file of {scenario_id, plan[][2]} lines.
class ExternalPlanner final : public Planner {
 public:
  ExternalPlanner(std::string name, std::map<std::string, std::vector<Vec2>> plans)
      : name_(std::move(name)), plans_(std::move(plans)) {}
  static ExternalPlanner load(const std::filesystem::path& path);

  std::string name() const override { return name_; }
  /// Throws DataError when the scenario has no plan or its length differs
  /// from the future horizon.
  Trajectory plan(const Segment& seg) const override;

 private:
  std::string name_;
  std::map<std::string, std::vector<Vec2>> plans_;
};

struct PlanMetrics {
  double ade = 0.0;
  double fde = 0.0;
  double collision = 0.0;  // 1 when the ego disc touches a recorded disc at some step
  double ttc = 0.0;
};

PlanMetrics plan_metrics(std::span<const AgentState> plan, const Segment& seg, double disc_scale = 1.0);

struct BucketEvaluation {
  int bucket = 0;
  std::string planner;
  double mean_ttc = 0.0;
  double mean_ttc_excluding_sentinel = 0.0;  // NaN when every scenario hit the sentinel
  std::size_t n = 0;
  std::size_t n_sentinel = 0;
};

/// Mean TTC of the planner over the bucket's default segments.
BucketEvaluation evaluate_planner(const Planner& planner, const Bucket& bucket,
                                  const std::map<std::string, ScenarioPtr>& data);

/// CSV bucket,planner,mean_ttc,mean_ttc_excluding_sentinel,n.
void save_bucket_report(const std::filesystem::path& path, const std::vector<BucketEvaluation>& rows);

std::map<std::string, ScenarioPtr> index_by_id(const ScenarioSet& data);

}  // namespace surprise
