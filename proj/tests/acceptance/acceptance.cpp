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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/lp_vertex.hpp"
#include "oracles/ranks.hpp"
#include "support/builders.hpp"
#include "support/random_gmm.hpp"
#include "surprise/curation.hpp"
#include "surprise/eval_rank.hpp"
#include "surprise/shift_metrics.hpp"
#include "surprise/surprise.hpp"
#include "surprise/synthetic.hpp"

using namespace surprise;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

// Collects failures of one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
  void near(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol,
           what + ": got " + fmt(got) + ", want " + fmt(want) + " +- " + fmt(tol));
  }
  static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  }
};

int failed = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) c.failures.push_back("runtime " + Check::fmt(secs) + " s over budget");
  const bool ok = c.failures.empty();
  failed += !ok;
  std::printf("%s %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs, c.detail.empty() ? "" : " ",
              c.detail.c_str());
  for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
}

GaussianMode iso_mode(std::vector<double> mean, double var = 1.0, double weight = 1.0) {
  const auto d = static_cast<Eigen::Index>(mean.size());
  return {weight, Eigen::Map<Eigen::VectorXd>(mean.data(), d), var * Eigen::MatrixXd::Identity(d, d)};
}

SurpriseConfig config(GeneratorKind nominal, GeneratorKind counter, Metric metric = Metric::kW2) {
  SurpriseConfig c;
  c.nominal = nominal;
  c.counterfactual = counter;
  c.metric = metric;
  return c;
}

Scenario two_cars(const std::string& id, Vec2 p_ego, Vec2 v_ego, Vec2 p_other, Vec2 v_other, double size = 4.5,
                  double width = 1.9) {
  Scenario s = blank_scenario(id);
  s.agents.push_back(linear_agent("ego", 18, 0.5, p_ego.x - 4.5 * v_ego.x, p_ego.y - 4.5 * v_ego.y, v_ego.x, v_ego.y,
                                  size, width));
  s.agents.push_back(linear_agent("o", 18, 0.5, p_other.x - 4.5 * v_other.x, p_other.y - 4.5 * v_other.y, v_other.x,
                                  v_other.y, size, width));
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Shared synthetic run: 200 labelled scenes scored once.
struct SyntheticRun {
  SyntheticCorpus corpus;
  std::map<std::string, double> surprise_scores;
  std::map<std::string, double> ttc_scores;
};

const SyntheticRun& synthetic_run() {
  static const SyntheticRun run = [] {
    SyntheticRun r;
    r.corpus = make_synthetic_corpus({100, 100, 7, true});
    const auto lib = extract_primitives(r.corpus.scenarios, 5.0, 16, 0);
    ReferencePredictor pred;
    const auto sp = batch_score(r.corpus.scenarios, {config(GeneratorKind::kHistPrim, GeneratorKind::kHistPrim)},
                                pred, {&lib, 1});
    const auto rules = batch_rules(r.corpus.scenarios, pred, {}, 1);
    r.surprise_scores = sp.by_metric().begin()->second;
    r.ttc_scores = rules.by_metric().at("rule-ttc");
    return r;
  }();
  return run;
}

}  // namespace

int main() {
  criterion("w2-analytic", 10.0, [](Check& c) {
    c.near(gaussian_w2_cost(iso_mode({0, 0}), iso_mode({3, 4})), 25.0, 1e-9, "means 5 apart");
    GaussianMode wide = iso_mode({1, 1});
    wide.covariance = Eigen::Vector2d(4, 1).asDiagonal();
    c.near(gaussian_w2_cost(wide, iso_mode({1, 1})), 1.0, 1e-9, "diag(4,1) vs identity");
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kd(1, 5), dd(1, 16);
    for (int i = 0; i < 200; ++i) {
      const int dim = dd(rng);
      const auto g1 = random_gmm(kd(rng), dim, rng);
      const auto g2 = random_gmm(kd(rng), dim, rng);
      c.near(w2_gmm(g1, g1), 0.0, 1e-8, "identity, pair " + std::to_string(i));
      const double a = w2_gmm(g1, g2), b = w2_gmm(g2, g1);
      c.near(a, b, 1e-8 * std::max(1.0, std::abs(a)), "symmetry, pair " + std::to_string(i));
    }
  });

  criterion("transport-lp-oracle", 30.0, [](Check& c) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> kd(1, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_gap = 0.0, worst_residual = 0.0;
    for (int i = 0; i < 500; ++i) {
      const int m = kd(rng), n = kd(rng);
      Eigen::MatrixXd cost(m, n);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < n; ++b) cost(a, b) = 10.0 * u(rng);
      Eigen::VectorXd s(m), d(n);
      for (int a = 0; a < m; ++a) s(a) = 0.05 + u(rng);
      for (int b = 0; b < n; ++b) d(b) = 0.05 + u(rng);
      s /= s.sum();
      d /= d.sum();
      const auto plan = solve_transport(cost, s, d);
      const auto ref = oracle::transport_by_vertices(cost, s, d);
      worst_gap = std::max(worst_gap, std::abs(plan.objective - ref.objective));
      c.near(plan.objective, ref.objective, 1e-8, "objective, instance " + std::to_string(i));
      const double residual = std::max({(plan.plan.rowwise().sum() - s).cwiseAbs().maxCoeff(),
                                        (plan.plan.colwise().sum().transpose() - d).cwiseAbs().maxCoeff(),
                                        std::max(0.0, -plan.plan.minCoeff())});
      worst_residual = std::max(worst_residual, residual);
      c.expect(residual < 1e-8, "feasibility, instance " + std::to_string(i));
    }
    c.detail = "max |gap| " + Check::fmt(worst_gap) + ", max residual " + Check::fmt(worst_residual);
  });

  criterion("kld-estimator", 20.0, [](Check& c) {
    for (const double gap : {1.0, 2.0, 5.0}) {
      const GmmPrediction p{"a", {iso_mode({0.0})}};
      const GmmPrediction q{"a", {iso_mode({gap})}};
      const auto k = kld_gmm(p, q, 200000, 11);
      const double want = gap * gap / 2.0;
      c.expect(std::abs(k.value - want) <= 3.0 * k.standard_error,
               "KL " + Check::fmt(want) + ": got " + Check::fmt(k.value) + " (se " + Check::fmt(k.standard_error) +
                   ")");
      c.detail += Check::fmt(want) + "->" + Check::fmt(k.value) + " ";
    }
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
      const auto g = random_gmm(3, 4, rng);
      c.expect(kld_gmm(g, g, 1000, i).value == 0.0, "self divergence not exactly 0");
    }
  });

  criterion("l2-topk", 0, [](Check& c) {
    c.near(l2_topk({"a", {iso_mode({0, 0})}}, {"a", {iso_mode({15, 20})}}), 5.0, 1e-12, "distance 25");
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> kd(1, 6);
    for (int i = 0; i < 100; ++i) {
      auto g1 = random_gmm(kd(rng), 6, rng);
      auto g2 = random_gmm(kd(rng), 6, rng);
      const double before = l2_topk(g1, g2);
      std::shuffle(g1.modes.begin(), g1.modes.end(), rng);
      std::shuffle(g2.modes.begin(), g2.modes.end(), rng);
      c.near(l2_topk(g1, g2), before, 1e-12 * std::max(1.0, before), "permutation, pair " + std::to_string(i));
    }
  });

  criterion("surprise-zero-and-ordering", 0, [](Check& c) {
    const auto corpus = make_synthetic_corpus({10, 10, 3, true});
    const auto lib = extract_primitives(corpus.scenarios, 5.0, 16, 0);
    ReferencePredictor pred;
    for (auto kind : {GeneratorKind::kFutNone, GeneratorKind::kFutGt, GeneratorKind::kFutCvm,
                      GeneratorKind::kFutCvmLane, GeneratorKind::kHistRmv})
      for (auto metric : {Metric::kW2, Metric::kL2, Metric::kKld})
        for (const auto& s : corpus.scenarios) {
          const auto r = surprise::surprise(default_segment(s), config(kind, kind, metric), &lib, pred);
          c.expect(r.score == 0.0, std::string(to_string(kind)) + " on " + s->scenario_id);
        }
    const auto seg = default_segment(car_following_scene());
    const auto cf = car_following_primitives();
    const auto r = surprise::surprise(seg, config(GeneratorKind::kHistPrim, GeneratorKind::kHistPrim), &cf, pred);
    double follower = -1, bystander = -1;
    for (const auto& a : r.per_agent) {
      if (a.agent_id == "follower") follower = a.score;
      if (a.agent_id == "bystander") bystander = a.score;
    }
    c.expect(follower > bystander, "follower " + Check::fmt(follower) + " not above bystander");
    c.expect(bystander == 0.0, "bystander " + Check::fmt(bystander) + " not exactly 0");
    c.detail = "follower " + Check::fmt(follower);
  });

  criterion("synthetic-separability", 300.0, [](Check& c) {
    const auto& run = synthetic_run();
    c.expect(run.corpus.scenarios.size() == 200, "corpus size");
    const double sp = auc_roc(run.surprise_scores, run.corpus.labels);
    const double ttc = auc_roc(run.ttc_scores, run.corpus.labels);
    c.expect(sp >= 0.9, "surprise AUC " + Check::fmt(sp) + " below 0.9");
    c.expect(ttc < sp, "rule-ttc AUC " + Check::fmt(ttc) + " not below surprise AUC");
    c.detail = "AUC surprise " + Check::fmt(sp) + ", rule-ttc " + Check::fmt(ttc);
  });

  criterion("reward-recovery", 0, [](Check& c) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Vector4d truth(1.5, -1.0, 0.5, 0.0);
    FeatureSet train, held;
    train.names = held.names = {"f1", "f2", "f3", "f4"};
    std::vector<std::string> train_ids;
    std::map<std::string, double> held_truth;
    for (int i = 0; i < 1500; ++i) {
      const Eigen::Vector4d x(g(rng), g(rng), g(rng), g(rng));
      char id[16];
      std::snprintf(id, sizeof(id), "s%04d", i);
      if (i < 1000) {
        train.rows[id] = x;
        train_ids.push_back(id);
      } else {
        held.rows[id] = x;
        held_truth[id] = truth.dot(x);
      }
    }
    std::vector<PreferenceRecord> prefs;
    std::uniform_int_distribution<std::size_t> pick(0, train_ids.size() - 1);
    while (prefs.size() < 5000) {
      const auto& a = train_ids[pick(rng)];
      const auto& b = train_ids[pick(rng)];
      if (a == b) continue;
      bool a_wins = truth.dot(train.rows[a]) > truth.dot(train.rows[b]);
      if (u(rng) < 0.1) a_wins = !a_wins;
      prefs.push_back({"synthetic", a, b, a_wins ? Choice::kA : Choice::kB, 0});
    }
    const Ranking want = rank_by_scores(held_truth, "truth");
    const auto full = spearman(rank_dataset(fit_reward(prefs, train), held), want);
    const std::vector<PreferenceRecord> part(prefs.begin(), prefs.begin() + 1500);
    const auto partial = spearman(rank_dataset(fit_reward(part, train), held), want);
    c.expect(full >= 0.95, "held-out Spearman " + Check::fmt(full));
    c.expect(std::abs(full - partial) <= 0.05, "30% labels Spearman " + Check::fmt(partial));
    c.detail = "Spearman 100% " + Check::fmt(full) + ", 30% " + Check::fmt(partial);
  });

  criterion("evaluation-oracles", 0, [](Check& c) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> nd(2, 40);
    for (int t = 0; t < 1000; ++t) {
      const int n = nd(rng);
      std::vector<double> x(n), y(n);
      std::iota(x.begin(), x.end(), 0.0);
      std::iota(y.begin(), y.end(), 0.0);
      std::shuffle(x.begin(), x.end(), rng);
      std::shuffle(y.begin(), y.end(), rng);
      std::map<std::string, double> mx, my;
      for (int i = 0; i < n; ++i) {
        mx["i" + std::to_string(i)] = x[i];
        my["i" + std::to_string(i)] = y[i];
      }
      std::vector<double> rx, ry;
      for (const auto& [k, v] : mx) rx.push_back(v + 1);
      for (const auto& [k, v] : my) ry.push_back(v + 1);
      c.near(spearman(rank_by_scores(mx, "x"), rank_by_scores(my, "y")), oracle::spearman_d2(rx, ry), 1e-12,
             "d2 formula, trial " + std::to_string(t));
    }
    std::uniform_int_distribution<int> small(0, 4);
    for (int t = 0; t < 200; ++t) {
      const int n = nd(rng) + 2;
      std::map<std::string, double> mx, my;
      for (int i = 0; i < n; ++i) {
        mx["i" + std::to_string(i)] = small(rng);
        my["i" + std::to_string(i)] = small(rng);
      }
      std::vector<double> vx, vy;
      for (const auto& [k, v] : mx) vx.push_back(v);
      for (const auto& [k, v] : my) vy.push_back(v);
      const double want = oracle::brute_spearman(vx, vy);
      if (!std::isfinite(want)) continue;
      c.near(spearman_scores(mx, my), want, 1e-12, "ties, trial " + std::to_string(t));
    }
    std::bernoulli_distribution coin(0.4);
    for (int t = 0; t < 1000; ++t) {
      const int n = nd(rng) + 2;
      std::map<std::string, double> s;
      std::map<std::string, bool> l;
      for (int i = 0; i < n; ++i) {
        const auto id = "i" + std::to_string(i);
        s[id] = small(rng);
        l[id] = coin(rng);
      }
      l["i0"] = true;
      l["i1"] = false;
      c.near(auc_roc(s, l), oracle::pair_count_auc(s, l), 1e-12, "auc, trial " + std::to_string(t));
    }
  });

  criterion("curation-formulas", 0, [](Check& c) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> nd(1, 1000);
    for (const double tau : {0.1, 1.0, 10.0})
      for (int t = 0; t < 20; ++t) {
        const int n = t == 0 ? 1000 : nd(rng);
        std::map<std::string, double> s;
        for (int i = 0; i < n; ++i) s["s" + std::to_string(i)] = std::uniform_real_distribution<double>()(rng);
        const auto r = rank_by_scores(s, "m");
        const auto w = upsample_weights(r, tau);
        double total = 0.0;
        for (int k = 1; k <= n; ++k) total += std::exp(-k / (tau * n));
        for (int k = 0; k < n; ++k) {
          const double raw = std::exp(-(k + 1) / (tau * n));
          c.near(w.raw[k], raw, 1e-12, "raw weight");
          c.near(w.normalized[k], raw / total, 1e-12, "normalized weight");
        }
      }
    std::map<std::string, double> s;
    for (int i = 0; i < 500; ++i) s["s" + std::to_string(i)] = i;
    const auto flat = upsample_weights(rank_by_scores(s, "m"), 1e6);
    const auto [lo, hi] = std::minmax_element(flat.normalized.begin(), flat.normalized.end());
    c.expect(*hi / *lo < 1.001, "tau 1e6 ratio " + Check::fmt(*hi / *lo));
    for (int t = 0; t < 200; ++t) {
      const int n = nd(rng);
      const int b = std::uniform_int_distribution<int>(1, n)(rng);
      std::map<std::string, double> m;
      for (int i = 0; i < n; ++i) m["s" + std::to_string(i)] = i % 7;
      const auto r = rank_by_scores(m, "m");
      const auto buckets = bucket_split(r, b);
      std::vector<std::string> joined;
      std::size_t lo_size = n, hi_size = 0;
      for (const auto& bk : buckets) {
        joined.insert(joined.end(), bk.ids.begin(), bk.ids.end());
        lo_size = std::min(lo_size, bk.ids.size());
        hi_size = std::max(hi_size, bk.ids.size());
      }
      c.expect(static_cast<int>(buckets.size()) == b, "bucket count");
      c.expect(joined == r.ids, "buckets are not the ranking in order");
      c.expect(hi_size - lo_size <= 1, "bucket sizes differ by more than one");
    }
  });

  criterion("ttc-kinematics", 0, [](Check& c) {
    const double side = std::sqrt(2.0);
    c.near(ttc(default_segment(share(two_cars("head", {0, 0}, {5, 0}, {22, 0}, {-5, 0}, side, side)))), 2.0, 1e-6,
           "head-on TTC");
    const auto par = default_segment(share(two_cars("par", {0, 0}, {8, 0}, {0, 5}, {8, 0})));
    c.expect(ttc(par) == ttc_sentinel(par), "parallel TTC is not the sentinel");
    c.near(ttce(default_segment(share(two_cars("cross", {0, 0}, {10, 0}, {15, -15}, {0, 10})))), 1.5, 1e-6,
           "crossing TTCE");

    const auto closing = [&](const std::string& id, double gap) {
      Scenario s = blank_scenario(id);
      s.agents.push_back(linear_agent("ego", 18, 0.5, -45, 0, 10, 0, side, side));
      s.agents.push_back(linear_agent("o", 18, 0.5, gap, 0, 0, 0, side, side));
      return share(s);
    };
    RulePlanner rule;
    const auto index = index_by_id({closing("c1", 12), closing("c2", 22)});
    c.near(evaluate_planner(rule, {0, {"c1", "c2"}}, index).mean_ttc, 1.5, 1e-6, "bucket mean of 1 s and 2 s");

    const auto& run = synthetic_run();
    const auto ranking = rank_by_scores(run.surprise_scores, "surprise");
    const auto buckets = bucket_split(ranking, 5);
    const auto data = index_by_id(run.corpus.scenarios);
    const double top = evaluate_planner(rule, buckets.front(), data).mean_ttc;
    const double bottom = evaluate_planner(rule, buckets.back(), data).mean_ttc;
    c.expect(top < bottom, "top bucket TTC " + Check::fmt(top) + " not below bottom " + Check::fmt(bottom));
    c.detail = "mean TTC top " + Check::fmt(top) + ", bottom " + Check::fmt(bottom);
  });

  criterion("determinism-and-round-trips", 0, [](Check& c) {
    const auto dir = fs::path(temp_path("acceptance"));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto corpus = make_synthetic_corpus({8, 8, 21, true});
    const auto lib = extract_primitives(corpus.scenarios, 5.0, 16, 0);
    ReferencePredictor pred;
    std::vector<SurpriseConfig> cfgs = {config(GeneratorKind::kHistPrim, GeneratorKind::kHistPrim),
                                        config(GeneratorKind::kFutNone, GeneratorKind::kHistRmv, Metric::kKld),
                                        config(GeneratorKind::kFutNone, GeneratorKind::kFutCvm, Metric::kL2)};
    for (auto& cf : cfgs) cf.seed = 9;
    batch_score(corpus.scenarios, cfgs, pred, {&lib, 1}).save(dir / "a.csv");
    batch_score(corpus.scenarios, cfgs, pred, {&lib, 1}).save(dir / "b.csv");
    batch_score(corpus.scenarios, cfgs, pred, {&lib, 4}).save(dir / "c.csv");
    c.expect(slurp(dir / "a.csv") == slurp(dir / "b.csv"), "repeated score runs differ");
    c.expect(slurp(dir / "a.csv") == slurp(dir / "c.csv"), "score differs across thread counts");

#ifdef SURPRISE_CLI_PATH
    const std::string cli = SURPRISE_CLI_PATH;
    const auto sh = [](const std::string& cmd) {
      const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
      return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    };
    const auto d = [&](const char* name) { return (dir / name).string(); };
    c.expect(sh(cli + " synth --out " + d("cli.jsonl") + " --conflict 5 --free-flow 5") == 0, "cli synth");
    c.expect(sh(cli + " extract-primitives --dataset " + d("cli.jsonl") + " --out " + d("cli_prims.jsonl")) == 0,
             "cli extract-primitives");
    for (const char* out : {"cli1.csv", "cli2.csv"})
      c.expect(sh(cli + " score --seed 4 --dataset " + d("cli.jsonl") + " --primitives " + d("cli_prims.jsonl") +
                  " --metric w2,l2,kld --out " + d(out)) == 0,
               "cli score");
    c.expect(!slurp(dir / "cli1.csv").empty() && slurp(dir / "cli1.csv") == slurp(dir / "cli2.csv"),
             "cli score outputs differ");
#endif

    save_dataset(dir / "d1.jsonl", corpus.scenarios);
    save_dataset(dir / "d2.jsonl", load_dataset(dir / "d1.jsonl"));
    c.expect(slurp(dir / "d1.jsonl") == slurp(dir / "d2.jsonl"), "dataset round-trip");

    lib.save(dir / "p.jsonl");
    c.expect(PrimitiveLibrary::load(dir / "p.jsonl") == lib, "primitive round-trip");

    RecordingPredictor rec(pred);
    const auto live = batch_score(corpus.scenarios, cfgs, rec, {&lib, 1});
    rec.snapshot().save(dir / "cache.jsonl");
    const auto cache = std::make_shared<const PredictionCache>(PredictionCache::load(dir / "cache.jsonl"));
    c.expect(cache->warnings().empty(), "cache reload warnings");
    const auto replay = batch_score(corpus.scenarios, cfgs, CachedPredictor(cache), {&lib, 1});
    live.save(dir / "live.csv");
    replay.save(dir / "replay.csv");
    c.expect(slurp(dir / "live.csv") == slurp(dir / "replay.csv"), "prediction cache replay differs");
    cache->save(dir / "cache2.jsonl");
    c.expect(slurp(dir / "cache.jsonl") == slurp(dir / "cache2.jsonl"), "prediction cache round-trip");

    std::vector<PreferenceRecord> labels = {{"ann1", "a", "b", Choice::kA, 1767225600000},
                                            {"ann2", "b", "c", Choice::kSkip, 1767225600001},
                                            {"ann1", "c", "a", Choice::kB, 1767225600002}};
    save_preferences(dir / "labels.jsonl", labels);
    c.expect(load_preferences(dir / "labels.jsonl") == labels, "label round-trip");
    fs::remove_all(dir);
  });

  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
