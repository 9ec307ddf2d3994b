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

// Command-line entry point. Exit status 0 on success, 1 on usage errors, 2 on
// data or validation errors.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "surprise/annotation.hpp"
#include "surprise/counterfactuals.hpp"
#include "surprise/curation.hpp"
#include "surprise/eval_rank.hpp"
#include "surprise/predictor.hpp"
#include "surprise/scenario.hpp"
#include "surprise/shift_metrics.hpp"
#include "surprise/surprise.hpp"
#include "surprise/synthetic.hpp"

namespace sp = surprise;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw sp::IoError("cannot open '" + path + "' for writing");
  return out;
}

// scenario_id,label[,...] with label 0/1 or true/false.
std::map<std::string, bool> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sp::IoError("cannot open '" + path + "'");
  std::map<std::string, bool> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (lineno == 1 && cells.size() >= 2 && cells[0] == "scenario_id") continue;
    if (cells.size() < 2) throw sp::DataError(path + ":" + std::to_string(lineno) + ": expected scenario_id,label");
    const std::string& v = cells[1];
    if (v == "1" || v == "true") labels[cells[0]] = true;
    else if (v == "0" || v == "false") labels[cells[0]] = false;
    else throw sp::DataError(path + ":" + std::to_string(lineno) + ": bad label '" + v + "'");
  }
  return labels;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Key=value lines of a run config; '#' and ';' start comments, [sections] are
// ignored and surrounding quotes are stripped.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--config", "expected key=value: '" + line + "'");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(trim(line.substr(0, eq)), value);
  }
  return out;
}

bool has_flag(const std::vector<std::string>& args, std::size_t from, const std::string& flag) {
  for (std::size_t i = from; i < args.size(); ++i)
    if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends config entries for flags the command line does not set.
std::vector<std::string> merge_config(std::vector<std::string> args, const CLI::App& app) {
  std::size_t sub = 1;
  while (sub < args.size() && args[sub].rfind("-", 0) == 0) sub += args[sub].find('=') == std::string::npos ? 2 : 1;
  if (sub >= args.size()) return args;
  const CLI::App* cmd = nullptr;
  try {
    cmd = app.get_subcommand(args[sub]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    if (key == "config" || cmd->get_option_no_throw(flag) == nullptr)
      throw CLI::ValidationError("--config", "unknown key '" + key + "' for " + cmd->get_name());
    if (has_flag(args, sub + 1, flag)) continue;
    const auto* opt = cmd->get_option(flag);
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

void print_config(const CLI::App& cmd, std::uint64_t seed) {
  std::cerr << "# " << cmd.get_name() << " configuration\n";
  for (const auto* opt : cmd.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "help-all" || name == "seed") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    }
    std::cerr << name << "=" << value << "\n";
  }
  std::cerr << "seed=" << seed << "\n";
}

struct Globals {
  std::uint64_t seed = 0;
};

void add_seed(CLI::App* cmd, Globals& g) {
  cmd->add_option("--seed", g.seed, "Random seed for every stochastic step");
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string out;
};

int run_ingest(const IngestArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw sp::IoError("cannot open '" + a.input + "'");
  sp::ScenarioSet data;
  std::vector<std::string> problems;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto s = sp::parse_scenario(line);
      const auto report = sp::validate_scenario(s);
      if (!report.ok()) {
        problems.push_back(a.input + ":" + std::to_string(lineno) + ": " + report.summary());
        continue;
      }
      data.push_back(std::make_shared<const sp::Scenario>(std::move(s)));
    } catch (const sp::Error& e) {
      problems.push_back(a.input + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) {
    std::cerr << problems.size() << " invalid record(s)\n";
    return 2;
  }
  if (!a.out.empty()) sp::save_dataset(a.out, data);
  std::cerr << data.size() << " scenario(s) valid\n";
  return 0;
}

struct SynthArgs {
  std::string out;
  std::string labels;
  int conflict = 100;
  int free_flow = 100;
  bool fixed_pose = false;
};

int run_synth(const SynthArgs& a, std::uint64_t seed) {
  sp::SyntheticOptions opts;
  opts.conflict_scenes = a.conflict;
  opts.free_flow_scenes = a.free_flow;
  opts.seed = seed;
  opts.random_pose = !a.fixed_pose;
  const auto corpus = sp::make_synthetic_corpus(opts);
  sp::save_dataset(a.out, corpus.scenarios);
  if (!a.labels.empty()) {
    auto out = open_out(a.labels);
    out << "scenario_id,label,archetype\n";
    for (const auto& s : corpus.scenarios)
      out << s->scenario_id << ',' << (corpus.labels.at(s->scenario_id) ? 1 : 0) << ','
          << corpus.archetype.at(s->scenario_id) << '\n';
  }
  return 0;
}

struct ExtractArgs {
  std::string dataset;
  std::string out;
  double horizon = 5.0;
  int max_count = 16;
};

int run_extract(const ExtractArgs& a, std::uint64_t seed) {
  const auto data = sp::load_dataset(a.dataset);
  const auto lib = sp::extract_primitives(data, a.horizon, a.max_count, seed);
  lib.save(a.out);
  std::map<std::string, int> counts;
  for (const auto& p : lib.primitives) ++counts[std::string(sp::to_string(sp::classify(p)))];
  for (const auto& [b, n] : counts) std::cerr << b << ": " << n << "\n";
  return 0;
}

struct ScoreArgs {
  std::string dataset;
  std::string primitives;
  std::string predictions;
  std::string record_predictions;
  std::string out;
  std::vector<std::string> nominal{"hist-prim"};
  std::vector<std::string> counterfactual{"hist-prim"};
  std::vector<std::string> metric{"w2"};
  int num_modes = 6;
  std::string target = "ego";
  std::string agent_aggregation = "max";
  std::string variant_aggregation = "max";
  int max_variants = 8;
  int kld_samples = 2000;
  double l2_exponent = 0.5;
  int threads = 0;
};

int run_score(const ScoreArgs& a, std::uint64_t seed) {
  const auto data = sp::load_dataset(a.dataset);
  std::vector<sp::SurpriseConfig> cfgs;
  bool needs_library = false;
  for (const auto& nom : a.nominal)
    for (const auto& cf : a.counterfactual)
      for (const auto& m : a.metric) {
        sp::SurpriseConfig c;
        c.nominal = sp::parse_generator_kind(nom);
        c.counterfactual = sp::parse_generator_kind(cf);
        c.metric = sp::parse_metric(m);
        c.num_modes = a.num_modes;
        c.target = sp::parse_target_policy(a.target);
        c.agent_aggregation = sp::parse_aggregation(a.agent_aggregation);
        c.variant_aggregation = sp::parse_aggregation(a.variant_aggregation);
        c.max_variants = a.max_variants;
        c.kld_samples = a.kld_samples;
        c.l2_exponent = a.l2_exponent;
        c.seed = seed;
        c.validate();
        for (auto k : {c.nominal, c.counterfactual})
          needs_library |= k == sp::GeneratorKind::kHistPrim || k == sp::GeneratorKind::kFutPrim;
        cfgs.push_back(c);
      }
  std::optional<sp::PrimitiveLibrary> lib;
  if (!a.primitives.empty()) lib = sp::PrimitiveLibrary::load(a.primitives);
  else if (needs_library) throw sp::ArgumentError("--primitives is required for primitive generators");

  std::unique_ptr<sp::Predictor> base;
  if (!a.predictions.empty()) {
    auto cache = std::make_shared<const sp::PredictionCache>(sp::PredictionCache::load(a.predictions));
    for (const auto& w : cache->warnings()) std::cerr << a.predictions << ":" << w.line << ": " << w.message << "\n";
    base = std::make_unique<sp::CachedPredictor>(cache);
  } else {
    base = std::make_unique<sp::ReferencePredictor>();
  }
  std::unique_ptr<sp::RecordingPredictor> recorder;
  const sp::Predictor* predictor = base.get();
  if (!a.record_predictions.empty()) {
    recorder = std::make_unique<sp::RecordingPredictor>(*base);
    predictor = recorder.get();
  }
  sp::BatchOptions opts;
  opts.library = lib ? &*lib : nullptr;
  opts.threads = a.threads;
  const auto table = sp::batch_score(data, cfgs, *predictor, opts);
  table.save(a.out);
  if (recorder) recorder->snapshot().save(a.record_predictions);
  for (const auto& d : table.diagnostics) std::cerr << d.scenario_id << " [" << d.metric << "]: " << d.message << "\n";
  std::cerr << table.rows.size() << " row(s), " << table.diagnostics.size() << " failure(s)\n";
  return 0;
}

struct RulesArgs {
  std::string dataset;
  std::string out;
  int num_modes = 6;
  double neighbour_radius = 5.0;
  int threads = 0;
};

int run_rules(const RulesArgs& a) {
  const auto data = sp::load_dataset(a.dataset);
  sp::RuleConfig cfg;
  cfg.num_modes = a.num_modes;
  cfg.neighbour_radius = a.neighbour_radius;
  sp::ReferencePredictor predictor;
  const auto table = sp::batch_rules(data, predictor, cfg, a.threads);
  table.save(a.out);
  for (const auto& d : table.diagnostics) std::cerr << d.scenario_id << " [" << d.metric << "]: " << d.message << "\n";
  return 0;
}

// Merges score tables; later tables win on repeated (scenario, metric).
sp::ScoreTable load_scores(const std::vector<std::string>& paths) {
  sp::ScoreTable merged;
  for (const auto& p : paths) {
    auto t = sp::ScoreTable::load(p);
    merged.rows.insert(merged.rows.end(), t.rows.begin(), t.rows.end());
  }
  return merged;
}

std::vector<std::string> all_metrics(const sp::ScoreTable& t) {
  std::vector<std::string> names;
  for (const auto& [m, _] : t.by_metric()) names.push_back(m);
  return names;
}

struct FitArgs {
  std::string preferences;
  std::vector<std::string> scores;
  std::vector<std::string> features;
  std::string out;
  double lambda = 1e-3;
  double step = 0.1;
  int max_iterations = 10000;
  double tolerance = 1e-6;
};

int run_fit(const FitArgs& a, std::uint64_t seed) {
  const auto prefs = sp::load_preferences(a.preferences);
  const auto table = load_scores(a.scores);
  const auto names = a.features.empty() ? all_metrics(table) : a.features;
  const auto fs = sp::featurize(table, names);
  sp::FitOptions opts;
  opts.lambda = a.lambda;
  opts.step = a.step;
  opts.max_iterations = a.max_iterations;
  opts.gradient_tolerance = a.tolerance;
  opts.seed = seed;
  const auto model = sp::fit_reward(prefs, fs, opts);
  model.save(a.out);
  std::cerr << "records " << model.records << ", iterations " << model.iterations << ", loss "
            << fmt(model.loss_curve.back()) << ", gradient norm " << fmt(model.gradient_norm) << "\n";
  return 0;
}

struct RankArgs {
  std::string model;
  std::vector<std::string> scores;
  std::string out;
};

int run_rank(const RankArgs& a) {
  const auto model = sp::RewardModel::load(a.model);
  const auto table = load_scores(a.scores);
  const auto fs = sp::featurize(table, model.features);
  const auto ranking = sp::rank_dataset(model, fs);
  std::map<std::string, double> scores;
  for (const auto& [id, row] : fs.rows) scores[id] = model.score(row);
  sp::save_ranking(a.out, ranking, scores);
  return 0;
}

struct EvalArgs {
  std::string ranking;
  std::vector<std::string> scores;
  std::string against;
  std::string labels;
  double top_frac = 0.1;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  if (a.ranking.empty() == a.scores.empty()) throw sp::ArgumentError("give exactly one of --ranking or --scores");
  if (a.against.empty() && a.labels.empty()) throw sp::ArgumentError("give --against and/or --labels");
  std::map<std::string, std::map<std::string, double>> candidates;
  if (!a.ranking.empty()) {
    std::map<std::string, double> s;
    const auto r = sp::load_ranking(a.ranking, &s);
    candidates[r.metric] = s;
  } else {
    candidates = load_scores(a.scores).by_metric();
  }
  std::map<std::string, double> reference;
  std::map<std::string, bool> top_labels;
  if (!a.against.empty()) {
    const auto r = sp::load_ranking(a.against, &reference);
    top_labels = sp::derive_labels(r, a.top_frac);
  }
  std::map<std::string, bool> given;
  if (!a.labels.empty()) given = load_labels(a.labels);

  std::ostringstream csv;
  csv << "metric,spearman,auc_top,auc_labels\n";
  for (const auto& [metric, s] : candidates) {
    std::string rho, auc_top, auc_lab;
    if (!reference.empty()) {
      std::map<std::string, double> x, y;
      std::map<std::string, bool> lab;
      for (const auto& [id, v] : reference)
        if (auto it = s.find(id); it != s.end()) {
          x[id] = it->second;
          y[id] = v;
          lab[id] = top_labels.at(id);
        }
      rho = fmt(sp::spearman_scores(x, y));
      auc_top = fmt(sp::auc_roc(x, lab));
    }
    if (!given.empty()) {
      std::map<std::string, bool> lab;
      for (const auto& [id, v] : given)
        if (s.contains(id)) lab[id] = v;
      auc_lab = fmt(sp::auc_roc(s, lab));
    }
    csv << metric << ',' << rho << ',' << auc_top << ',' << auc_lab << '\n';
  }
  std::cout << csv.str();
  if (!a.out.empty()) open_out(a.out) << csv.str();
  return 0;
}

struct BucketArgs {
  std::string ranking;
  int num_buckets = 5;
  std::string out;
};

int run_buckets(const BucketArgs& a) {
  const auto r = sp::load_ranking(a.ranking);
  const auto buckets = sp::bucket_split(r, a.num_buckets);
  auto out = open_out(a.out);
  out << "bucket,rank,scenario_id\n";
  for (const auto& b : buckets)
    for (const auto& id : b.ids) out << b.index << ',' << r.rank.at(id) << ',' << id << '\n';
  return 0;
}

struct WeightArgs {
  std::string ranking;
  double tau = 1.0;
  std::string out;
};

int run_weights(const WeightArgs& a) {
  const auto r = sp::load_ranking(a.ranking);
  sp::upsample_weights(r, a.tau).save(a.out);
  return 0;
}

struct PlanEvalArgs {
  std::string dataset;
  std::string ranking;
  int num_buckets = 5;
  std::vector<std::string> planners{"rule"};
  std::vector<std::string> plans;
  std::string out;
};

int run_plan_eval(const PlanEvalArgs& a) {
  const auto data = sp::load_dataset(a.dataset);
  const auto index = sp::index_by_id(data);
  const auto r = sp::load_ranking(a.ranking);
  const auto buckets = sp::bucket_split(r, a.num_buckets);
  sp::ReferencePredictor predictor;
  std::vector<std::unique_ptr<sp::Planner>> planners;
  for (const auto& name : a.planners) {
    if (name == "rule") planners.push_back(std::make_unique<sp::RulePlanner>());
    else if (name == "predictor") planners.push_back(std::make_unique<sp::PredictionPlanner>(predictor));
    else throw sp::ArgumentError("unknown planner '" + name + "' (rule, predictor)");
  }
  for (const auto& p : a.plans) planners.push_back(std::make_unique<sp::ExternalPlanner>(sp::ExternalPlanner::load(p)));
  std::vector<sp::BucketEvaluation> rows;
  for (const auto& p : planners)
    for (const auto& b : buckets) rows.push_back(sp::evaluate_planner(*p, b, index));
  sp::save_bucket_report(a.out, rows);
  return 0;
}

struct ServeArgs {
  std::string dataset;
  std::string labels;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string strategy = "uniform-random";
};

int run_serve(const ServeArgs& a, std::uint64_t seed) {
  auto data = sp::load_dataset(a.dataset);
  sp::AnnotationOptions opts;
  opts.labels = a.labels;
  opts.strategy = sp::parse_pair_strategy(a.strategy);
  opts.seed = seed;
  sp::AnnotationService service(std::move(data), opts);
  for (const auto& d : service.diagnostics()) std::cerr << d << "\n";
  sp::AnnotationServer server(service);
  const int port = server.bind(a.host, a.port);
  std::cerr << "listening on http://" << a.host << ":" << port << "\n";
  server.run();
  return 0;
}

// ---------------------------------------------------------------------------
// Analytic checks of the shift metrics.

sp::GaussianMode mode(std::vector<double> mean, std::vector<double> var, double w = 1.0) {
  sp::GaussianMode m;
  m.weight = w;
  m.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.covariance = Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size())).asDiagonal();
  return m;
}

sp::GmmPrediction gmm(std::vector<sp::GaussianMode> modes) { return {"x", std::move(modes)}; }

int run_self_test() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
    failures += ok ? 0 : 1;
  };
  {
    const double c = sp::gaussian_w2_cost(mode({0, 0}, {1, 1}), mode({3, 4}, {1, 1}));
    check("w2 mean shift", std::abs(c - 25.0) < 1e-9, "got " + fmt(c) + ", want 25");
  }
  {
    const double c = sp::gaussian_w2_cost(mode({0, 0}, {4, 1}), mode({0, 0}, {1, 1}));
    check("w2 covariance", std::abs(c - 1.0) < 1e-9, "got " + fmt(c) + ", want 1");
  }
  {
    const auto g = gmm({mode({0, 1}, {1, 2}, 0.3), mode({2, -1}, {0.5, 0.5}, 0.7)});
    check("w2 identity", sp::w2_gmm(g, g) == 0.0, "w2(g, g) == 0");
  }
  {
    Eigen::MatrixXd cost(2, 2);
    cost << 0, 1, 1, 0;
    Eigen::VectorXd s(2), d(2);
    s << 0.5, 0.5;
    d << 0.3, 0.7;
    const auto plan = sp::solve_transport(cost, s, d);
    check("transport", std::abs(plan.objective - 0.2) < 1e-12, "got " + fmt(plan.objective) + ", want 0.2");
  }
  {
    // KL(N(0,1) || N(m,1)) = m^2 / 2.
    const auto p = gmm({mode({0}, {1})});
    const auto q = gmm({mode({2}, {1})});
    const auto est = sp::kld_gmm(p, q, 200000, 1);
    check("kld single gaussian", std::abs(est.value - 2.0) <= 3.0 * est.standard_error,
          "got " + fmt(est.value) + " +- " + fmt(est.standard_error) + ", want 2");
    check("kld identity", sp::kld_gmm(p, p, 1000, 1).value == 0.0, "kld(g, g) == 0");
  }
  {
    const double v = sp::l2_topk(gmm({mode({0, 0}, {1, 1})}), gmm({mode({15, 20}, {1, 1})}));
    check("l2 top-k", std::abs(v - 5.0) < 1e-12, "got " + fmt(v) + ", want 5");
  }
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surprise-potential scoring, ranking and curation", "surprise"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Globals g;
  app.add_option("--seed", g.seed, "Random seed for every stochastic step");
  std::function<int()> action;

  auto with_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", "key=value file; command-line flags take precedence")->check(CLI::ExistingFile);
    add_seed(cmd, g);
    return cmd;
  };

  IngestArgs ingest;
  auto* c_ingest = with_config(app.add_subcommand("ingest", "Validate a scenario file"));
  c_ingest->add_option("--input,--dataset", ingest.input, "Scenario file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Normalised copy of the valid dataset");
  c_ingest->callback([&] { action = [&] { return run_ingest(ingest); }; });

  SynthArgs synth;
  auto* c_synth = with_config(app.add_subcommand("synth", "Write the synthetic labelled corpus"));
  c_synth->add_option("--out", synth.out, "Scenario file")->required();
  c_synth->add_option("--labels", synth.labels, "CSV scenario_id,label,archetype");
  c_synth->add_option("--conflict", synth.conflict, "Conflict scenes")->check(CLI::NonNegativeNumber);
  c_synth->add_option("--free-flow", synth.free_flow, "Free-flow scenes")->check(CLI::NonNegativeNumber);
  c_synth->add_flag("--fixed-pose", synth.fixed_pose, "Skip the random rigid transform");
  c_synth->callback([&] { action = [&] { return run_synth(synth, g.seed); }; });

  ExtractArgs extract;
  auto* c_extract = with_config(app.add_subcommand("extract-primitives", "Build a motion-primitive library"));
  c_extract->add_option("--dataset", extract.dataset, "Scenario file")->required()->check(CLI::ExistingFile);
  c_extract->add_option("--out", extract.out, "Primitive file")->required();
  c_extract->add_option("--horizon", extract.horizon, "Primitive duration in seconds");
  c_extract->add_option("--max-count", extract.max_count, "Library size bound")->check(CLI::PositiveNumber);
  c_extract->callback([&] { action = [&] { return run_extract(extract, g.seed); }; });

  ScoreArgs score;
  auto* c_score = with_config(app.add_subcommand("score", "Surprise scores for every scenario"));
  c_score->add_option("--dataset", score.dataset, "Scenario file")->required()->check(CLI::ExistingFile);
  c_score->add_option("--out", score.out, "Score table")->required();
  c_score->add_option("--primitives", score.primitives, "Primitive file")->check(CLI::ExistingFile);
  c_score->add_option("--predictions", score.predictions, "Prediction cache used instead of the reference predictor")
      ->check(CLI::ExistingFile);
  c_score->add_option("--record-predictions", score.record_predictions, "Write every prediction to a cache file");
  c_score->add_option("--nominal", score.nominal, "Nominal generator(s)")->delimiter(',');
  c_score->add_option("--counterfactual", score.counterfactual, "Counterfactual generator(s)")->delimiter(',');
  c_score->add_option("--metric", score.metric, "Shift metric(s): l2, kld, w2")->delimiter(',');
  c_score->add_option("--num-modes", score.num_modes, "Prediction modes K");
  c_score->add_option("--target", score.target, "ego or each-agent");
  c_score->add_option("--agent-aggregation", score.agent_aggregation, "max, mean or sum");
  c_score->add_option("--variant-aggregation", score.variant_aggregation, "max, mean or sum");
  c_score->add_option("--max-variants", score.max_variants, "Variants per generator");
  c_score->add_option("--kld-samples", score.kld_samples, "Monte-Carlo samples for kld");
  c_score->add_option("--l2-exponent", score.l2_exponent, "Exponent of the l2 displacement");
  c_score->add_option("--threads", score.threads, "Worker threads (0 = all cores)");
  c_score->callback([&] { action = [&] { return run_score(score, g.seed); }; });

  RulesArgs rules;
  auto* c_rules = with_config(app.add_subcommand("rules", "Rule-baseline scores"));
  c_rules->add_option("--dataset", rules.dataset, "Scenario file")->required()->check(CLI::ExistingFile);
  c_rules->add_option("--out", rules.out, "Score table")->required();
  c_rules->add_option("--num-modes", rules.num_modes, "Prediction modes for rule-err");
  c_rules->add_option("--neighbour-radius", rules.neighbour_radius, "Radius for rule-num in metres");
  c_rules->add_option("--threads", rules.threads, "Worker threads (0 = all cores)");
  c_rules->callback([&] { action = [&] { return run_rules(rules); }; });

  FitArgs fit;
  auto* c_fit = with_config(app.add_subcommand("fit-reward", "Fit the pairwise reward model"));
  c_fit->add_option("--preferences", fit.preferences, "Preference file")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--scores", fit.scores, "Score table(s)")->required()->delimiter(',')->check(CLI::ExistingFile);
  c_fit->add_option("--features", fit.features, "Metric names (default: every metric)")->delimiter(',');
  c_fit->add_option("--out", fit.out, "Model file")->required();
  c_fit->add_option("--lambda", fit.lambda, "L2 penalty");
  c_fit->add_option("--step", fit.step, "Initial step size");
  c_fit->add_option("--max-iterations", fit.max_iterations, "Iteration cap");
  c_fit->add_option("--tolerance", fit.tolerance, "Gradient-norm stopping tolerance");
  c_fit->callback([&] { action = [&] { return run_fit(fit, g.seed); }; });

  RankArgs rank;
  auto* c_rank = with_config(app.add_subcommand("rank", "Rank a dataset with a reward model"));
  c_rank->add_option("--model", rank.model, "Model file")->required()->check(CLI::ExistingFile);
  c_rank->add_option("--scores", rank.scores, "Score table(s)")->required()->delimiter(',')->check(CLI::ExistingFile);
  c_rank->add_option("--out", rank.out, "Ranking file")->required();
  c_rank->callback([&] { action = [&] { return run_rank(rank); }; });

  EvalArgs eval;
  auto* c_eval = with_config(app.add_subcommand("eval", "Spearman and AUC against a reference"));
  c_eval->add_option("--ranking", eval.ranking, "Ranking to evaluate")->check(CLI::ExistingFile);
  c_eval->add_option("--scores", eval.scores, "Score table(s), one row per metric")->delimiter(',')
      ->check(CLI::ExistingFile);
  c_eval->add_option("--against", eval.against, "Reference ranking")->check(CLI::ExistingFile);
  c_eval->add_option("--labels", eval.labels, "CSV scenario_id,label")->check(CLI::ExistingFile);
  c_eval->add_option("--top-frac", eval.top_frac, "Positive fraction of the reference ranking");
  c_eval->add_option("--out", eval.out, "CSV copy of the report");
  c_eval->callback([&] { action = [&] { return run_eval(eval); }; });

  BucketArgs buckets;
  auto* c_buckets = with_config(app.add_subcommand("buckets", "Split a ranking into contiguous buckets"));
  c_buckets->add_option("--ranking", buckets.ranking, "Ranking file")->required()->check(CLI::ExistingFile);
  c_buckets->add_option("--num-buckets", buckets.num_buckets, "Bucket count");
  c_buckets->add_option("--out", buckets.out, "CSV bucket,rank,scenario_id")->required();
  c_buckets->callback([&] { action = [&] { return run_buckets(buckets); }; });

  WeightArgs weights;
  auto* c_weights = with_config(app.add_subcommand("weights", "Rank-based upsampling weights"));
  c_weights->add_option("--ranking", weights.ranking, "Ranking file")->required()->check(CLI::ExistingFile);
  c_weights->add_option("--tau", weights.tau, "Temperature")->check(CLI::PositiveNumber);
  c_weights->add_option("--out", weights.out, "Weights file")->required();
  c_weights->callback([&] { action = [&] { return run_weights(weights); }; });

  PlanEvalArgs plan_eval;
  auto* c_plan = with_config(app.add_subcommand("plan-eval", "Mean planner TTC per ranking bucket"));
  c_plan->add_option("--dataset", plan_eval.dataset, "Scenario file")->required()->check(CLI::ExistingFile);
  c_plan->add_option("--ranking", plan_eval.ranking, "Ranking file")->required()->check(CLI::ExistingFile);
  c_plan->add_option("--num-buckets", plan_eval.num_buckets, "Bucket count");
  c_plan->add_option("--planner", plan_eval.planners, "Built-in planners: rule, predictor")->delimiter(',');
  c_plan->add_option("--plans", plan_eval.plans, "External plan file(s)")->check(CLI::ExistingFile);
  c_plan->add_option("--out", plan_eval.out, "Bucket report")->required();
  c_plan->callback([&] { action = [&] { return run_plan_eval(plan_eval); }; });

  ServeArgs serve;
  auto* c_serve = with_config(app.add_subcommand("serve", "Run the annotation service"));
  c_serve->add_option("--dataset", serve.dataset, "Scenario file")->required()->check(CLI::ExistingFile);
  c_serve->add_option("--labels", serve.labels, "Label store")->required();
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port (0 picks one)");
  c_serve->add_option("--strategy", serve.strategy, "uniform-random or coverage-balanced");
  c_serve->callback([&] { action = [&] { return run_serve(serve, g.seed); }; });

  auto* c_metrics = app.add_subcommand("metrics", "Shift-metric utilities");
  c_metrics->require_subcommand(1);
  auto* c_self = c_metrics->add_subcommand("self-test", "Analytic checks of the shift metrics");
  c_self->callback([&] { action = [&] { return run_self_test(); }; });

  if (argc <= 1) {
    std::cerr << app.help();
    return 1;
  }
  try {
    auto args = merge_config(std::vector<std::string>(argv, argv + argc), app);
    std::vector<char*> ptrs;
    for (auto& a : args) ptrs.push_back(a.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (const auto* cmd : app.get_subcommands())
    if (cmd != c_metrics) print_config(*cmd, g.seed);

  try {
    return action ? action() : 1;
  } catch (const sp::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
