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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/builders.hpp"
#include "surprise/annotation.hpp"
#include "surprise/synthetic.hpp"

// After Eigen: the resolver headers pulled in here define `_res`.
#include <httplib.h>

using namespace surprise;
using namespace testing_support;
using nlohmann::json;

namespace {

ScenarioSet tiny_dataset(int n) {
  ScenarioSet out;
  for (int i = 0; i < n; ++i) {
    Scenario s = blank_scenario(std::string(1, static_cast<char>('a' + i)));
    s.agents.push_back(linear_agent("ego", 18, 0.5, 0, 0, 5 + i, 0));
    out.push_back(share(s));
  }
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(temp_path(name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

AnnotationOptions options(const TempDir& dir, PairStrategy strategy = PairStrategy::kUniformRandom) {
  auto counter = std::make_shared<std::int64_t>(1000);
  AnnotationOptions o;
  o.labels = dir.path / "labels.jsonl";
  o.strategy = strategy;
  o.seed = 3;
  o.clock = [counter] { return (*counter)++; };
  return o;
}

}  // namespace

TEST(Journal, TornTailIsDiscarded) {
  TempDir dir("journal");
  const auto path = dir.path / "j.log";
  {
    JournalFile j(path);
    j.append(R"({"a":1})");
    j.append(R"({"a":2})");
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"a":3,"tor)";
  }
  JournalFile again(path);
  EXPECT_EQ(again.replay(), (std::vector<std::string>{R"({"a":1})", R"({"a":2})"}));
  ASSERT_EQ(again.diagnostics().size(), 1u);
  again.append(R"({"a":4})");
  JournalFile third(path);
  EXPECT_EQ(third.replay().size(), 3u);
  EXPECT_TRUE(third.diagnostics().empty());
}

TEST(LabelStore, FirstWriteWins) {
  TempDir dir("store");
  LabelStore store(dir.path / "l.jsonl");
  const PreferenceRecord first{"ann", "a", "b", Choice::kA, 1};
  EXPECT_TRUE(store.append("p1", first).accepted);
  const auto second = store.append("p1", {"ann", "a", "b", Choice::kB, 2});
  EXPECT_FALSE(second.accepted);
  EXPECT_EQ(second.effective, first);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.superseded(), 1u);
  LabelStore reopened(dir.path / "l.jsonl");
  EXPECT_EQ(reopened.effective(), std::vector<PreferenceRecord>{first});
  EXPECT_EQ(reopened.superseded(), 1u);
}

TEST(Service, TwoScenariosExhaust) {
  TempDir dir("two");
  AnnotationService svc(tiny_dataset(2), options(dir));
  const auto p = svc.next_pair("ann");
  EXPECT_EQ(std::set<std::string>({p.a, p.b}), (std::set<std::string>{"a", "b"}));
  // Unlabelled pairs are served again under the same id.
  EXPECT_EQ(svc.next_pair("ann").pair_id, p.pair_id);
  svc.submit_label(p.pair_id, "A");
  EXPECT_THROW(svc.next_pair("ann"), ExhaustedError);
  EXPECT_NO_THROW(svc.next_pair("other"));
  EXPECT_THROW(AnnotationService(tiny_dataset(1), options(dir)).next_pair("x"), ArgumentError);
}

TEST(Service, NeverRepeatsOrSelfPairs) {
  TempDir dir("cover");
  AnnotationService svc(tiny_dataset(6), options(dir));
  std::set<std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 15; ++i) {
    const auto p = svc.next_pair("ann");
    EXPECT_NE(p.a, p.b);
    EXPECT_TRUE(seen.insert(std::minmax(p.a, p.b)).second);
    svc.submit_label(p.pair_id, i % 3 == 0 ? "skip" : "B");
  }
  EXPECT_THROW(svc.next_pair("ann"), ExhaustedError);
}

TEST(Service, CoverageBalancedPrefersLeastLabelled) {
  TempDir dir("balanced");
  const ScenarioSet data = tiny_dataset(7);  // a..g
  {
    // Seed the store with labels touching a five times and never b or c.
    PairRegistry reg(dir.path / "labels.jsonl.pairs");
    LabelStore store(dir.path / "labels.jsonl");
    const std::vector<std::pair<std::string, std::string>> pairs = {{"a", "d"}, {"a", "e"}, {"a", "f"}, {"a", "g"}};
    int n = 0;
    for (const auto& [x, y] : pairs) {
      const std::string id = "seed-" + std::to_string(n++);
      reg.append({id, x, y, "u1", n});
      store.append(id, {"u1", x, y, Choice::kA, n});
    }
    reg.append({"seed-9", "d", "a", "u2", 9});
    store.append("seed-9", {"u2", "d", "a", Choice::kB, 9});
  }
  AnnotationService svc(data, options(dir, PairStrategy::kCoverageBalanced));
  const auto p = svc.next_pair("fresh");
  EXPECT_EQ(p.a, "b");
  EXPECT_EQ(p.b, "c");
}

TEST(Service, UnknownPairAndBadChoiceLeaveStoreUnchanged) {
  TempDir dir("unknown");
  AnnotationService svc(tiny_dataset(3), options(dir));
  EXPECT_THROW(svc.submit_label("pair-999999", "A"), UnknownPairError);
  const auto p = svc.next_pair("ann");
  EXPECT_THROW(svc.submit_label(p.pair_id, "C"), ArgumentError);
  EXPECT_EQ(svc.num_labels(), 0u);
  EXPECT_EQ(svc.export_text(), "");
}

TEST(Service, ExportIsDeterministicAndSurvivesRestart) {
  TempDir dir("restart");
  std::string first_export;
  {
    AnnotationService svc(tiny_dataset(4), options(dir));
    for (const char* ann : {"u1", "u2", "u1"}) {
      const auto p = svc.next_pair(ann);
      svc.submit_label(p.pair_id, "A");
    }
    first_export = svc.export_text();
    EXPECT_EQ(svc.export_text(), first_export);
    const auto recs = svc.labels();
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].annotator, "u1");
    EXPECT_EQ(recs[1].annotator, "u2");
    const auto out = dir.path / "prefs.jsonl";
    svc.export_labels(out);
    EXPECT_EQ(load_preferences(out), recs);
  }
  AnnotationService again(tiny_dataset(4), options(dir));
  EXPECT_EQ(again.export_text(), first_export);
  EXPECT_EQ(again.num_labels(), 3u);
}

TEST(Service, PayloadCarriesGeometry) {
  TempDir dir("payload");
  AnnotationService svc({car_following_scene(), tiny_dataset(1)[0]}, options(dir));
  const auto j = json::parse(svc.render_payload("car-following"));
  EXPECT_EQ(j["scenario_id"], "car-following");
  EXPECT_EQ(j["agents"].size(), 3u);
  EXPECT_FALSE(j["lanes"].empty());
  EXPECT_TRUE(j.contains("split_index"));
  const auto pair = json::parse(svc.pair_response(svc.next_pair("ann")));
  EXPECT_TRUE(pair.contains("a"));
  EXPECT_TRUE(pair["b"].contains("agents"));
  EXPECT_THROW(svc.render_payload("nope"), ArgumentError);
}

TEST(Http, ScriptedClientLabelsFivePairs) {
  TempDir dir("http");
  const auto corpus = make_synthetic_corpus({5, 5, 4, true});
  AnnotationService svc(corpus.scenarios, options(dir));
  AnnotationServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  std::thread worker([&] { server.run(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(5);
  for (int i = 0; i < 100; ++i) {
    if (auto r = cli.Get("/api/health"); r && r->status == 200) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  std::vector<std::string> pair_ids;
  for (int i = 0; i < 5; ++i) {
    auto r = cli.Get("/api/pair?annotator=script");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    const auto body = json::parse(r->body);
    pair_ids.push_back(body["pair_id"]);
    EXPECT_TRUE(body["a"].contains("agents"));
    const json label{{"pair_id", body["pair_id"]}, {"choice", i % 2 ? "A" : "B"}};
    auto ack = cli.Post("/api/label", label.dump(), "application/json");
    ASSERT_TRUE(ack);
    EXPECT_EQ(ack->status, 200);
    EXPECT_EQ(json::parse(ack->body)["status"], "recorded");
  }
  auto before = cli.Get("/api/export");
  ASSERT_TRUE(before);
  // Duplicates with a different choice do not change the export.
  for (const auto& id : pair_ids) {
    auto ack = cli.Post("/api/label", json{{"pair_id", id}, {"choice", "skip"}}.dump(), "application/json");
    ASSERT_TRUE(ack);
    EXPECT_EQ(json::parse(ack->body)["status"], "superseded");
  }
  auto after = cli.Get("/api/export");
  ASSERT_TRUE(after);
  EXPECT_EQ(after->body, before->body);
  EXPECT_EQ(std::count(after->body.begin(), after->body.end(), '\n'), 5);

  EXPECT_EQ(cli.Post("/api/label", R"({"pair_id":"pair-424242","choice":"A"})", "application/json")->status, 404);
  EXPECT_EQ(cli.Post("/api/label", "not json", "application/json")->status, 400);
  EXPECT_EQ(cli.Get("/api/pair")->status, 400);
  server.stop();
  worker.join();

  const auto exported = dir.path / "export.jsonl";
  {
    std::ofstream out(exported);
    out << after->body;
  }
  const auto prefs = load_preferences(exported);
  ASSERT_EQ(prefs.size(), 5u);
  FeatureSet features{{"speed"}, {}};
  for (const auto& s : corpus.scenarios)
    features.rows[s->scenario_id] = Eigen::VectorXd::Constant(1, s->agents[0].states[0]->speed());
  EXPECT_NO_THROW(fit_reward(prefs, features));
}
