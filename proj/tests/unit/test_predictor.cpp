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

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "surprise/error.hpp"
#include "surprise/kinematics.hpp"
#include "surprise/predictor.hpp"

using namespace surprise;
using namespace testing_support;

namespace {

GaussianMode mode(double w, std::vector<double> mean, double var = 1.0) {
  const auto d = static_cast<Eigen::Index>(mean.size());
  return {w, Eigen::Map<Eigen::VectorXd>(mean.data(), d), var * Eigen::MatrixXd::Identity(d, d)};
}

// Independent key: FNV-1a of "%.3f" text after rounding to the nearest milli.
std::string reference_key(const Trajectory& traj) {
  std::string text;
  for (const auto& s : traj) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", text.empty() ? "" : ",", std::round(s.x * 1000) / 1000 + 0.0,
                  std::round(s.y * 1000) / 1000 + 0.0);
    text += buf;
  }
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
  char out[17];
  std::snprintf(out, sizeof(out), "%016" PRIx64, h);
  return out;
}

// Lead ego at 6 m/s with a follower `gap` metres behind at `follower_speed`.
Segment following(double gap, double follower_speed, bool with_lane = false) {
  Scenario s = blank_scenario("follow");
  s.agents.push_back(linear_agent("ego", 18, 0.5, 0, 0, 6, 0));
  s.agents.push_back(linear_agent("f", 18, 0.5, -gap - 4.5 * (follower_speed - 6), 0, follower_speed, 0));
  if (with_lane) s.lanes.push_back(straight_lane("L", {-200, 0}, {200, 0}));
  return default_segment(share(s));
}

double weight_of(const std::vector<Hypothesis>& hyps, HypothesisKind k) {
  for (const auto& h : hyps)
    if (h.kind == k) return h.weight;
  return -1;
}

}  // namespace

TEST(Gmm, ValidationCatchesBrokenMixtures) {
  GmmPrediction g{"a", {mode(0.25, {0, 0}), mode(0.75, {1, 1})}};
  EXPECT_NO_THROW(validate_gmm(g));
  auto bad = g;
  bad.modes[0].weight = 0.2;
  EXPECT_THROW(validate_gmm(bad), DataError);
  bad = g;
  bad.modes[1] = mode(0.75, {1, 1, 1});
  EXPECT_THROW(validate_gmm(bad), DataError);
  bad = g;
  bad.modes[0].covariance(0, 1) = 0.5;
  EXPECT_THROW(validate_gmm(bad), DataError);
  bad = g;
  bad.modes[0].covariance << 1, 2, 2, 1;
  EXPECT_THROW(validate_gmm(bad), DataError);
  bad = g;
  bad.modes[0].mean(0) = std::nan("");
  EXPECT_THROW(validate_gmm(bad), DataError);
  EXPECT_THROW(validate_gmm(GmmPrediction{"a", {}}), DataError);
}

TEST(ConditionKey, MatchesIndependentHash) {
  EXPECT_EQ(condition_key(Condition::none()), "none");
  Trajectory traj;
  for (int k = 1; k <= 8; ++k) traj.push_back(linear_state(k * 0.5, -3.21049, 7.5, 1.37, -0.4));
  const auto key = condition_key(Condition::on("ego", traj));
  EXPECT_EQ(key.size(), 16u);
  EXPECT_EQ(key, reference_key(traj));
  auto nudged = traj;
  nudged[3].x += 2e-4;
  EXPECT_EQ(condition_key(Condition::on("ego", nudged)), key);
  nudged[3].x += 2e-3;
  EXPECT_NE(condition_key(Condition::on("ego", nudged)), key);
}

TEST(ReferencePredictor, StationaryAgentSingleMode) {
  Scenario s = blank_scenario("still");
  s.agents.push_back(linear_agent("ego", 18, 0.5, 3, -2, 0, 0));
  const auto seg = default_segment(share(s));
  ReferencePredictor pred;
  const auto joint = pred.predict(seg, Condition::none(), 1, 0);
  const auto& g = joint.at("ego");
  ASSERT_EQ(g.modes.size(), 1u);
  EXPECT_DOUBLE_EQ(g.modes[0].weight, 1.0);
  ASSERT_EQ(g.dimension(), 16);
  for (int k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(g.modes[0].mean(2 * k), 3);
    EXPECT_DOUBLE_EQ(g.modes[0].mean(2 * k + 1), -2);
    const double sd = 0.25 * (k + 1);
    EXPECT_NEAR(g.modes[0].covariance(2 * k, 2 * k), sd * sd, 1e-15);
    EXPECT_NEAR(g.modes[0].covariance(2 * k + 1, 2 * k + 1), sd * sd, 1e-15);
  }
  EXPECT_EQ(g.modes[0].covariance.diagonal().asDiagonal().toDenseMatrix(), g.modes[0].covariance);
}

TEST(ReferencePredictor, ModeCountBounds) {
  const auto seg = following(30, 6);
  ReferencePredictor pred;
  EXPECT_THROW(pred.predict(seg, Condition::none(), 0, 0), ArgumentError);
  EXPECT_THROW(pred.predict(seg, Condition::none(), 16, 0), ArgumentError);
  for (int k = 1; k <= 15; ++k) {
    const auto joint = pred.predict(seg, Condition::none(), k, 0);
    for (const auto& [id, g] : joint) {
      EXPECT_EQ(static_cast<int>(g.modes.size()), k);
      EXPECT_NO_THROW(validate_gmm(g));
    }
  }
}

TEST(ReferencePredictor, PaddingPreservesHypothesisMass) {
  const auto seg = following(8, 8);
  ReferencePredictor pred;
  const auto hyps = pred.reference_modes(*seg.find("f"), seg, Condition::none());
  const auto g = pred.to_gmm("f", hyps, 15);
  ASSERT_EQ(g.modes.size(), 15u);
  for (const auto& h : hyps) {
    const auto flat = flatten_positions(h.trajectory);
    const Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(flat.data(), 16);
    double mass = 0;
    for (const auto& m : g.modes)
      if (m.mean == mean) mass += m.weight;
    double expected = 0;
    for (const auto& o : hyps)
      if (flatten_positions(o.trajectory) == flat) expected += o.weight;
    EXPECT_NEAR(mass, expected, 1e-12);
  }
}

TEST(ReferencePredictor, TruncationKeepsHeaviest) {
  const auto seg = following(40, 6);
  ReferencePredictor pred;
  const auto hyps = pred.reference_modes(*seg.find("ego"), seg, Condition::none());
  const auto g = pred.to_gmm("ego", hyps, 2);
  ASSERT_EQ(g.modes.size(), 2u);
  EXPECT_NEAR(g.modes[0].weight, 0.4 / 0.7, 1e-12);
  EXPECT_NEAR(g.modes[1].weight, 0.3 / 0.7, 1e-12);
}

TEST(ReferencePredictor, PriorsWithoutConflict) {
  const auto seg = following(40, 6, true);
  ReferencePredictor pred;
  const auto hyps = pred.reference_modes(*seg.find("ego"), seg, Condition::none());
  ASSERT_EQ(hyps.size(), 4u);
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kConstantVelocity), 0.4, 1e-12);
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kLaneFollow), 0.3, 1e-12);
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kBrake), 0.2, 1e-12);
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kAccelerate), 0.1, 1e-12);
  for (const auto& h : hyps) EXPECT_FALSE(h.replaced_by_brake);
  const auto cur = *seg.current(*seg.find("ego"));
  EXPECT_EQ(hyps[0].trajectory, cvm_rollout(cur, 4.0, 0.5));
  EXPECT_EQ(hyps[2].trajectory, accel_rollout(cur, -3.0, 4.0, 0.5));
  EXPECT_EQ(hyps[3].trajectory, accel_rollout(cur, 1.5, 4.0, 0.5));
}

TEST(ReferencePredictor, ConflictBoostsBraking) {
  // A follower closing in on the ego: its forward hypotheses reach the ego's
  // recent positions.
  const auto seg = following(8, 9);
  ReferencePredictor pred;
  const auto hyps = pred.reference_modes(*seg.find("f"), seg, Condition::none());
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kBrake), 0.6 / 1.4, 1e-12);
  EXPECT_NEAR(weight_of(hyps, HypothesisKind::kConstantVelocity), 0.4 / 1.4, 1e-12);
  const auto brake = hyps[2].trajectory;
  EXPECT_TRUE(hyps[0].replaced_by_brake);
  EXPECT_EQ(hyps[0].trajectory, brake);
}

TEST(ReferencePredictor, ConditionedNeighbourFollowsCondition) {
  const auto seg = following(8, 9);
  ReferencePredictor pred;
  // The ego is made to race away; the follower no longer hits its path.
  AgentState start = *seg.current(*seg.find("ego"));
  start.vx = 30;
  const Condition away = Condition::on("ego", cvm_rollout(start, 4.0, 0.5));
  const auto joint = pred.predict(seg, away, 4, 0);
  EXPECT_FALSE(joint.contains("ego"));
  const auto hyps = pred.reference_modes(*seg.find("f"), seg, away);
  const auto far = following(29, 6);
  const auto far_joint = pred.reference_modes(*far.find("f"), far, Condition::none());
  AgentState s2 = *far.current(*far.find("ego"));
  s2.vx = -6;  // reversing straight into the follower
  const auto back = pred.reference_modes(*far.find("f"), far, Condition::on("ego", cvm_rollout(s2, 4.0, 0.5)));
  EXPECT_NEAR(weight_of(far_joint, HypothesisKind::kBrake), 0.2, 1e-12);
  EXPECT_NEAR(weight_of(back, HypothesisKind::kBrake), 0.6 / 1.4, 1e-12);
  EXPECT_FALSE(hyps.empty());
  EXPECT_THROW(pred.predict(seg, Condition::on("ghost", away.trajectory), 4, 0), DataError);
  EXPECT_THROW(pred.predict(seg, Condition::on("ego", {away.trajectory[0]}), 4, 0), ArgumentError);
}

TEST(ReferencePredictor, DistantAgentsDoNotInteract) {
  Scenario s = blank_scenario("local");
  s.agents.push_back(linear_agent("ego", 18, 0.5, 0, 0, 6, 0));
  const auto alone = default_segment(share(s));
  s.agents.push_back(linear_agent("far", 18, 0.5, 27 + 31, 0, 0, 0));  // 31 m ahead at the split, parked
  const auto with_far = default_segment(share(s));
  ReferencePredictor pred;
  EXPECT_EQ(pred.predict(alone, Condition::none(), 6, 0).at("ego"),
            pred.predict(with_far, Condition::none(), 6, 0).at("ego"));
}

TEST(ReferencePredictor, LaneHypothesisFallsBackToConstantVelocity) {
  ReferencePredictor pred;
  const auto no_lane = following(40, 6);
  auto hyps = pred.reference_modes(*no_lane.find("ego"), no_lane, Condition::none());
  EXPECT_EQ(hyps[1].trajectory, hyps[0].trajectory);

  Scenario s = blank_scenario("offset");
  s.agents.push_back(linear_agent("ego", 18, 0.5, 0, 0, 6, 0.5));
  s.lanes.push_back(straight_lane("L", {-200, 10}, {200, 10}));  // more than 3 m away at the split
  const auto seg = default_segment(share(s));
  hyps = pred.reference_modes(*seg.find("ego"), seg, Condition::none());
  EXPECT_EQ(hyps[1].trajectory, hyps[0].trajectory);

  Scenario c = blank_scenario("curved");
  c.agents.push_back(linear_agent("ego", 18, 0.5, -27, 0, 6, 0));
  c.lanes.push_back({"L", {{-100, 0}, {0, 0}, {0, 100}}, 3.6});
  const auto cseg = default_segment(share(c));
  hyps = pred.reference_modes(*cseg.find("ego"), cseg, Condition::none());
  EXPECT_NEAR(hyps[1].trajectory.back().x, 0, 1e-9);
  EXPECT_NEAR(hyps[1].trajectory.back().y, 24 - 0, 1e-9);
}

TEST(ReferencePredictor, SeedDoesNotMatter) {
  const auto seg = following(8, 9, true);
  ReferencePredictor pred;
  EXPECT_EQ(pred.predict(seg, Condition::none(), 6, 1), pred.predict(seg, Condition::none(), 6, 99));
}

TEST(PredictionCache, RoundTripAndStrictLookup) {
  PredictionCache cache;
  GmmPrediction diag{"ego", {mode(0.5, {1, 2, 3, 4}, 0.25), mode(0.5, {1.5, 2, 3, 4}, 2.0)}};
  GmmPrediction full{"a1", {mode(1.0, {0.125, -7, 3, 1e-17})}};
  full.modes[0].covariance(0, 1) = full.modes[0].covariance(1, 0) = 0.3;
  cache.insert("s1", "base", "none", diag);
  cache.insert("s1", "base", "none", full);
  cache.insert("s1", "hist-rmv", "0123456789abcdef", diag);
  const auto path = temp_path("cache.jsonl");
  cache.save(path);
  const auto loaded = PredictionCache::load(path);
  EXPECT_EQ(loaded.size(), 2u);
  EXPECT_TRUE(loaded.warnings().empty());
  EXPECT_EQ(loaded.lookup("s1", "base", "none"), cache.lookup("s1", "base", "none"));
  EXPECT_EQ(cached_predict(loaded, "s1", "hist-rmv", "0123456789abcdef").at("ego"), diag);
  EXPECT_THROW(loaded.lookup("s1", "base", "0123456789abcdef"), DataError);
  EXPECT_THROW(loaded.lookup("s2", "base", "none"), DataError);
  std::filesystem::remove(path);
}

TEST(PredictionCache, RenormalisesWithWarningAndRejectsGarbage) {
  const auto path = temp_path("cache_bad.jsonl");
  {
    std::ofstream f(path);
    f << R"({"scenario_id":"s","variant_id":"base","cond_key":"none","agent_id":"a","modes":[)"
      << R"({"pi":0.3,"mean":[0,0],"cov_diag":[1,1]},{"pi":0.3,"mean":[1,1],"cov_diag":[1,1]}]})" << '\n';
  }
  const auto cache = PredictionCache::load(path);
  ASSERT_EQ(cache.warnings().size(), 1u);
  EXPECT_EQ(cache.warnings()[0].line, 1u);
  const auto& g = cache.lookup("s", "base", "none").at("a");
  EXPECT_DOUBLE_EQ(g.modes[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(g.modes[1].weight, 0.5);

  for (const char* line :
       {R"({"scenario_id":"s","variant_id":"base","cond_key":"none","agent_id":"a","modes":[]})",
        R"({"scenario_id":"s","variant_id":"base","cond_key":"none","agent_id":"a","modes":[{"pi":1,"mean":[0,0]}]})",
        R"({"scenario_id":"s","variant_id":"base","cond_key":"none","agent_id":"a","modes":[{"pi":1,"mean":[0,0],"cov":[[1,2],[2,1]]}]})",
        R"({"scenario_id":"s","variant_id":"base","cond_key":"none","agent_id":"a","modes":[{"pi":-1,"mean":[0],"cov_diag":[1]}]})",
        R"({"scenario_id":"s","cond_key":"none","agent_id":"a","modes":[{"pi":1,"mean":[0],"cov_diag":[1]}]})",
        "not json"}) {
    {
      std::ofstream f(path);
      f << line << '\n';
    }
    EXPECT_THROW(PredictionCache::load(path), DataError) << line;
  }
  std::filesystem::remove(path);
}

TEST(CachedPredictor, ReplaysRecordedPredictions) {
  const auto seg = following(8, 9, true);
  ReferencePredictor ref;
  RecordingPredictor rec(ref);
  const auto cond = Condition::on("ego", cvm_rollout(*seg.current(*seg.find("ego")), 4.0, 0.5));
  const auto a = rec.predict(seg, Condition::none(), 6, 0);
  const auto b = rec.predict(seg, cond, 6, 0);
  auto cache = std::make_shared<PredictionCache>(rec.snapshot());
  CachedPredictor replay(cache);
  EXPECT_EQ(replay.predict(seg, Condition::none(), 6, 0), a);
  EXPECT_EQ(replay.predict(seg, cond, 6, 0), b);
  Segment other = seg;
  other.variant_id = "hist-rmv";
  EXPECT_THROW(replay.predict(other, Condition::none(), 6, 0), DataError);

  auto wrong = std::make_shared<PredictionCache>();
  wrong->insert("follow", "base", "none", GmmPrediction{"ego", {mode(1.0, {0, 0, 0, 0})}});
  EXPECT_THROW(CachedPredictor(wrong).predict(seg, Condition::none(), 6, 0), DataError);
}
