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

// Pairwise-preference reward model, dataset ranking and ranking metrics.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "surprise/surprise.hpp"

namespace surprise {

enum class Choice { kA, kB, kSkip };

std::string_view to_string(Choice c);  // "A", "B", "skip"
Choice parse_choice(std::string_view token);

struct PreferenceRecord {
  std::string annotator;
  std::string a;
  std::string b;
  Choice choice = Choice::kSkip;
  std::int64_t ts = 0;  // milliseconds since the epoch

  bool operator==(const PreferenceRecord&) const = default;
};

/// One JSON object per line {annotator, a, b, choice, ts}. Throws DataError.
std::vector<PreferenceRecord> load_preferences(const std::filesystem::path& path);
void save_preferences(const std::filesystem::path& path, const std::vector<PreferenceRecord>& records);
std::string preference_to_json(const PreferenceRecord& r);

/// Raw (unstandardised) feature rows keyed by scenario id.
struct FeatureSet {
  std::vector<std::string> names;
  std::map<std::string, Eigen::VectorXd> rows;
};

/// Collects the named metrics for every scenario that has all of them.
/// Throws DataError naming the metric when a scenario misses one of them or a
/// metric is absent from the table.
FeatureSet featurize(const ScoreTable& table, const std::vector<std::string>& names);

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 where the training spread is zero

  Eigen::VectorXd apply(const Eigen::VectorXd& raw) const { return (raw - mean).cwiseQuotient(scale); }
};

struct FitOptions {
  double lambda = 1e-3;
  double step = 0.1;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct RewardModel {
  std::vector<std::string> features;
  Eigen::VectorXd weights;
  double bias = 0.0;
  Standardization standardization;
  // Training metadata.
  std::vector<double> loss_curve;  // loss before each accepted step, then the final loss
  int iterations = 0;
  double gradient_norm = 0.0;
  std::size_t records = 0;
  std::uint64_t seed = 0;

  double score(const Eigen::VectorXd& raw) const { return weights.dot(standardization.apply(raw)) + bias; }

  void save(const std::filesystem::path& path) const;
  /// Throws DataError.
  static RewardModel load(const std::filesystem::path& path);
};

/// Bradley-Terry fit, P(a > b) = logistic(f(a) - f(b)) with f linear in the
/// standardised features, by full-batch gradient descent with step halving.
/// Skip records are dropped. Throws DataError when nothing usable remains or
/// an id lacks features, NumericError on a non-finite loss.
RewardModel fit_reward(const std::vector<PreferenceRecord>& prefs, const FeatureSet& features,
                       const FitOptions& opts = {});

struct Ranking {
  std::string metric;
  std::vector<std::string> ids;      // rank 1 first
  std::map<std::string, int> rank;   // 1-based

  std::size_t size() const { return ids.size(); }
};

/// Descending score, ties by id ascending.
Ranking rank_by_scores(const std::map<std::string, double>& scores, const std::string& metric);
Ranking rank_dataset(const RewardModel& model, const FeatureSet& features);

/// Writes "rank,scenario_id,score" rows.
void save_ranking(const std::filesystem::path& path, const Ranking& r, const std::map<std::string, double>& scores);
/// Reads a ranking file back (scores returned through `scores` when given).
Ranking load_ranking(const std::filesystem::path& path, std::map<std::string, double>* scores = nullptr);

/// Average ranks (1-based) with ties sharing the mean of their positions,
/// ascending in value.
std::vector<double> fractional_ranks(const std::vector<double>& values);

/// Pearson correlation of rank vectors over a common id set. Throws
/// ArgumentError for fewer than 2 items or differing id sets, NumericError for
/// zero rank variance.
double spearman(const Ranking& x, const Ranking& y);
/// Spearman between score maps using fractional ranks.
double spearman_scores(const std::map<std::string, double>& x, const std::map<std::string, double>& y);

/// Rank-sum AUC with ties counted one half, over the labelled ids. Throws
/// ArgumentError for single-class labels or ids missing a score.
double auc_roc(const std::map<std::string, double>& scores, const std::map<std::string, bool>& labels);

/// Marks the ceil(top_frac * N) best-ranked ids positive.
std::map<std::string, bool> derive_labels(const Ranking& r, double top_frac);

}  // namespace surprise
