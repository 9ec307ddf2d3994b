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

// Surprise scoring: predicted-future shift between nominal and counterfactual
// edits of a scenario, plus the classical rule baselines.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surprise/counterfactuals.hpp"
#include "surprise/predictor.hpp"
#include "surprise/shift_metrics.hpp"

namespace surprise {

enum class TargetPolicy { kEgo, kEachAgent };
enum class Aggregation { kMax, kMean, kSum };

std::string_view to_string(TargetPolicy p);  // "ego", "each-agent"
std::string_view to_string(Aggregation a);   // "max", "mean", "sum"
TargetPolicy parse_target_policy(std::string_view token);
Aggregation parse_aggregation(std::string_view token);

struct SurpriseConfig {
  GeneratorKind nominal = GeneratorKind::kHistPrim;
  GeneratorKind counterfactual = GeneratorKind::kHistPrim;
  Metric metric = Metric::kW2;
  int num_modes = 6;
  TargetPolicy target = TargetPolicy::kEgo;
  Aggregation agent_aggregation = Aggregation::kMax;
  Aggregation variant_aggregation = Aggregation::kMax;
  int max_variants = 8;
  int kld_samples = 2000;
  double l2_exponent = 0.5;
  std::uint64_t seed = 0;

  /// Throws ArgumentError for out-of-range fields.
  void validate() const;
  /// Metric column name, e.g. "sp:hist-prim:hist-prim:w2:k6". Non-default
  /// target/aggregation settings append ":<field>=<value>" parts.
  std::string name() const;
};

struct AgentShift {
  std::string agent_id;
  double score = 0.0;  // aggregated over variant pairs, KLD clamped at 0
  double raw = 0.0;    // same aggregation without the clamp
  std::size_t pairs = 0;
};

struct SurpriseResult {
  double score = 0.0;
  std::string target_id;
  std::vector<AgentShift> per_agent;  // sorted by agent id
  std::vector<std::string> diagnostics;
};

/// Scores one segment. `library` may be null unless a primitive generator is
/// configured.
SurpriseResult surprise(const Segment& seg, const SurpriseConfig& cfg, const PrimitiveLibrary* library,
                        const Predictor& predictor);

// ---------------------------------------------------------------------------
// Rule baselines

struct RuleConfig {
  double neighbour_radius = 5.0;   // m, Rule-num
  double no_neighbour_distance = 1000.0;  // m, Rule-dist when ego is alone
  int num_modes = 6;               // Rule-err predictor modes
  double disc_scale = 1.0;         // disc radius = scale * half diagonal
};

inline constexpr std::array<std::string_view, 8> kRuleNames = {"rule-vel", "rule-acc", "rule-dist", "rule-num",
                                                               "rule-ttc", "rule-ttce", "rule-lane", "rule-err"};

/// Oriented rule values keyed by kRuleNames; higher means more interactive.
std::map<std::string, double> rule_scores(const Segment& seg, const Predictor& predictor, const RuleConfig& cfg = {});

/// Disc radius used for TTC geometry.
double disc_radius(const SegmentAgent& a, double scale = 1.0);

/// Returned when no contact happens inside the horizon.
double ttc_sentinel(const Segment& seg);

/// Earliest contact time of two discs moving linearly between the given
/// (time-aligned) samples. Returns nullopt when they never touch.
std::optional<double> first_contact(std::span<const std::optional<AgentState>> a,
                                    std::span<const std::optional<AgentState>> b, double radius_sum);

/// Constant-velocity extrapolation of every agent from the split state.
double ttc(const Segment& seg, double disc_scale = 1.0);
/// Time in [0, horizon] of the closest ego encounter under constant velocity;
/// sentinel when ego has no neighbour.
double ttce(const Segment& seg);

/// Time to first ego contact when ego follows `plan` (future steps 1..F) and
/// all others their recorded futures. Sentinel when there is none.
double ttc_with_plan(const Segment& seg, std::span<const AgentState> plan, double disc_scale = 1.0);

// ---------------------------------------------------------------------------
// Batch scoring

inline constexpr std::string_view kOrientation = "higher-more-interactive";
inline constexpr std::string_view kErrorOrientation = "error";

struct ScoreRow {
  std::string scenario_id;
  std::string metric;
  double score = 0.0;
  std::string orientation{kOrientation};

  bool failed() const { return orientation == kErrorOrientation; }
  bool operator==(const ScoreRow&) const = default;
};

struct ScoreDiagnostic {
  std::string scenario_id;
  std::string metric;
  std::string message;
  bool operator==(const ScoreDiagnostic&) const = default;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;
  std::vector<ScoreDiagnostic> diagnostics;

  /// CSV scenario_id,metric,score,orientation. Failed rows carry score "nan"
  /// and orientation "error"; their messages go to `<path>.diagnostics.csv`
  /// when there are any.
  void save(const std::filesystem::path& path) const;
  /// Reads a score CSV (diagnostics file ignored). Throws DataError.
  static ScoreTable load(const std::filesystem::path& path);

  /// metric -> scenario -> score over successful rows.
  std::map<std::string, std::map<std::string, double>> by_metric() const;
};

struct BatchOptions {
  const PrimitiveLibrary* library = nullptr;
  int threads = 1;  // <= 0 selects the hardware concurrency
};

/// One row per (scenario, config) in dataset-major order; failures become
/// error rows with a diagnostic.
ScoreTable batch_score(const ScenarioSet& data, const std::vector<SurpriseConfig>& cfgs, const Predictor& predictor,
                       const BatchOptions& opts = {});

/// Eight rule rows per scenario.
ScoreTable batch_rules(const ScenarioSet& data, const Predictor& predictor, const RuleConfig& cfg = {},
                       int threads = 1);

/// Runs fn(i) for i in [0, n) on `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace surprise
