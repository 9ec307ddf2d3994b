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

#include "surprise/surprise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "json_io.hpp"
#include "surprise/error.hpp"

namespace surprise {

std::string_view to_string(TargetPolicy p) { return p == TargetPolicy::kEgo ? "ego" : "each-agent"; }

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kMax:
      return "max";
    case Aggregation::kMean:
      return "mean";
    case Aggregation::kSum:
      return "sum";
  }
  return "max";
}

TargetPolicy parse_target_policy(std::string_view token) {
  if (token == "ego") return TargetPolicy::kEgo;
  if (token == "each-agent") return TargetPolicy::kEachAgent;
  throw ArgumentError("unknown target policy '" + std::string(token) + "'");
}

Aggregation parse_aggregation(std::string_view token) {
  for (const auto a : {Aggregation::kMax, Aggregation::kMean, Aggregation::kSum})
    if (to_string(a) == token) return a;
  throw ArgumentError("unknown aggregation '" + std::string(token) + "'");
}

void SurpriseConfig::validate() const {
  if (num_modes < 1 || num_modes > 15) throw ArgumentError("K must lie in [1, 15]");
  if (variant_aggregation == Aggregation::kSum) throw ArgumentError("variant aggregation must be max or mean");
  if (max_variants < 1) throw ArgumentError("max_variants must be positive");
  if (kld_samples < 1) throw ArgumentError("kld_samples must be positive");
  if (!(l2_exponent > 0.0)) throw ArgumentError("l2 exponent must be positive");
}

std::string SurpriseConfig::name() const {
  const SurpriseConfig d;
  std::string n = "sp:" + std::string(to_string(nominal)) + ":" + std::string(to_string(counterfactual)) + ":" +
                  std::string(to_string(metric)) + ":k" + std::to_string(num_modes);
  if (target != d.target) n += ":target=" + std::string(to_string(target));
  if (agent_aggregation != d.agent_aggregation) n += ":agents=" + std::string(to_string(agent_aggregation));
  if (variant_aggregation != d.variant_aggregation) n += ":variants=" + std::string(to_string(variant_aggregation));
  if (max_variants != d.max_variants) n += ":variants-max=" + std::to_string(max_variants);
  if (metric == Metric::kKld && kld_samples != d.kld_samples) n += ":samples=" + std::to_string(kld_samples);
  if (metric == Metric::kL2 && l2_exponent != d.l2_exponent) n += ":exp=" + detail::format_double(l2_exponent);
  return n;
}

namespace {

double aggregate(const std::vector<double>& v, Aggregation a) {
  if (v.empty()) return 0.0;
  switch (a) {
    case Aggregation::kMax:
      return *std::max_element(v.begin(), v.end());
    case Aggregation::kMean: {
      double s = 0.0;
      for (const double x : v) s += x;
      return s / static_cast<double>(v.size());
    }
    case Aggregation::kSum: {
      double s = 0.0;
      for (const double x : v) s += x;
      return s;
    }
  }
  return 0.0;
}

struct Predicted {
  const Variant* variant;
  const JointPrediction* joint;
};

class PredictionMemo {
 public:
  PredictionMemo(const Predictor& p, int k, std::uint64_t seed) : predictor_(p), k_(k), seed_(seed) {}

  const JointPrediction& get(const Variant& v, const std::string& target) {
    const Condition cond = v.condition ? Condition::on(target, *v.condition) : Condition::none();
    const auto key = std::make_pair(v.segment.variant_id, condition_key(cond));
    auto it = memo_.find(key);
    if (it == memo_.end()) it = memo_.emplace(key, predictor_.predict(v.segment, cond, k_, seed_)).first;
    return it->second;
  }

 private:
  const Predictor& predictor_;
  int k_;
  std::uint64_t seed_;
  std::map<std::pair<std::string, std::string>, JointPrediction> memo_;
};

double shift(const GmmPrediction& a, const GmmPrediction& b, const SurpriseConfig& cfg) {
  switch (cfg.metric) {
    case Metric::kW2:
      return w2_gmm(a, b);
    case Metric::kL2:
      return l2_topk(a, b, cfg.l2_exponent);
    case Metric::kKld: {
      const auto est = kld_gmm(a, b, cfg.kld_samples, cfg.seed);
      if (est.underflow_count > 0)
        throw NumericError("KLD diverged for agent '" + a.agent_id + "': " + std::to_string(est.underflow_count) +
                           " samples with zero counterfactual density");
      return est.value;
    }
  }
  return 0.0;
}

SurpriseResult surprise_for_target(const Segment& seg, const SurpriseConfig& cfg, const PrimitiveLibrary* library,
                                   const Predictor& predictor, const std::string& target) {
  const GenerateOptions gen{library, &predictor, cfg.max_variants, cfg.seed};
  const auto nominal = generate(seg, target, cfg.nominal, gen);
  const auto counter = generate(seg, target, cfg.counterfactual, gen);
  PredictionMemo memo(predictor, cfg.num_modes, cfg.seed);

  std::vector<Predicted> pn;
  std::vector<Predicted> pc;
  for (const auto& v : nominal.variants) pn.push_back({&v, &memo.get(v, target)});
  for (const auto& v : counter.variants) pc.push_back({&v, &memo.get(v, target)});
  const bool skip_diagonal = cfg.nominal == cfg.counterfactual && pn.size() >= 2;

  std::map<std::string, std::vector<double>> raw_by_agent;
  for (std::size_t i = 0; i < pn.size(); ++i) {
    for (std::size_t j = 0; j < pc.size(); ++j) {
      if (skip_diagonal && i == j) continue;
      for (const auto& [agent, g1] : *pn[i].joint) {
        if (agent == target) continue;
        const auto it = pc[j].joint->find(agent);
        if (it == pc[j].joint->end()) continue;
        raw_by_agent[agent].push_back(shift(g1, it->second, cfg));
      }
    }
  }

  SurpriseResult out;
  out.target_id = target;
  std::vector<double> agent_scores;
  for (const auto& [agent, raws] : raw_by_agent) {
    std::vector<double> clamped = raws;
    for (auto& x : clamped) x = std::max(0.0, x);
    AgentShift s{agent, aggregate(clamped, cfg.variant_aggregation), aggregate(raws, cfg.variant_aggregation),
                 raws.size()};
    agent_scores.push_back(s.score);
    out.per_agent.push_back(std::move(s));
  }
  if (out.per_agent.empty()) {
    out.diagnostics.push_back("no agent is predicted in both nominal and counterfactual variants of scenario '" +
                              seg.scenario_id() + "' (target '" + target + "'); scored 0");
    return out;
  }
  out.score = aggregate(agent_scores, cfg.agent_aggregation);
  return out;
}

}  // namespace

SurpriseResult surprise(const Segment& seg, const SurpriseConfig& cfg, const PrimitiveLibrary* library,
                        const Predictor& predictor) {
  cfg.validate();
  if (cfg.target == TargetPolicy::kEgo) return surprise_for_target(seg, cfg, library, predictor, seg.ego_id());
  std::optional<SurpriseResult> best;
  std::vector<std::string> notes;
  for (const auto& a : seg.agents) {
    if (!seg.current(a)) continue;
    auto r = surprise_for_target(seg, cfg, library, predictor, a.id);
    notes.insert(notes.end(), r.diagnostics.begin(), r.diagnostics.end());
    if (!best || r.score > best->score) best = std::move(r);
  }
  if (!best) throw GenerationError("no agent is observed at the split of scenario '" + seg.scenario_id() + "'");
  best->diagnostics = std::move(notes);
  return *best;
}

// ---------------------------------------------------------------------------
// Score tables

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void ScoreTable::save(const std::filesystem::path& path) const {
  {
    auto out = detail::open_for_write(path);
    out << "scenario_id,metric,score,orientation\n";
    for (const auto& r : rows)
      out << csv_field(r.scenario_id) << ',' << csv_field(r.metric) << ','
          << (r.failed() ? std::string("nan") : detail::format_double(r.score)) << ',' << r.orientation << '\n';
    if (!out) throw IoError("write failure on '" + path.string() + "'");
  }
  auto diag_path = path;
  diag_path += ".diagnostics.csv";
  if (diagnostics.empty()) {
    std::error_code ec;
    std::filesystem::remove(diag_path, ec);
    return;
  }
  auto out = detail::open_for_write(diag_path);
  out << "scenario_id,metric,message\n";
  for (const auto& d : diagnostics)
    out << csv_field(d.scenario_id) << ',' << csv_field(d.metric) << ',' << csv_field(d.message) << '\n';
  if (!out) throw IoError("write failure on '" + diag_path.string() + "'");
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  ScoreTable t;
  bool header = true;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(number) + ": ";
    if (header) {
      header = false;
      if (f.size() != 4 || f[0] != "scenario_id" || f[1] != "metric" || f[2] != "score" || f[3] != "orientation")
        throw DataError(where + "expected header scenario_id,metric,score,orientation");
      return;
    }
    if (f.size() != 4) throw DataError(where + "expected 4 fields");
    ScoreRow r{f[0], f[1], 0.0, f[3]};
    if (r.failed()) {
      r.score = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        std::size_t used = 0;
        r.score = std::stod(f[2], &used);
        if (used != f[2].size()) throw std::invalid_argument(f[2]);
      } catch (const std::exception&) {
        throw DataError(where + "score '" + f[2] + "' is not a number");
      }
      if (!std::isfinite(r.score)) throw DataError(where + "non-finite score");
    }
    t.rows.push_back(std::move(r));
  });
  if (header) throw DataError(path.string() + ": empty score file");
  return t;
}

std::map<std::string, std::map<std::string, double>> ScoreTable::by_metric() const {
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& r : rows)
    if (!r.failed()) out[r.metric][r.scenario_id] = r.score;
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ScoreTable batch_score(const ScenarioSet& data, const std::vector<SurpriseConfig>& cfgs, const Predictor& predictor,
                       const BatchOptions& opts) {
  for (const auto& c : cfgs) c.validate();
  const std::size_t nc = cfgs.size();
  std::vector<ScoreRow> rows(data.size() * nc);
  std::vector<std::vector<ScoreDiagnostic>> notes(data.size());
  parallel_for(data.size(), opts.threads, [&](std::size_t i) {
    const auto& scenario = data[i];
    std::optional<Segment> seg;
    std::string seg_error;
    try {
      seg = default_segment(scenario);
    } catch (const Error& e) {
      seg_error = e.what();
    }
    for (std::size_t c = 0; c < nc; ++c) {
      ScoreRow& row = rows[i * nc + c];
      row.scenario_id = scenario->scenario_id;
      row.metric = cfgs[c].name();
      try {
        if (!seg) throw DataError(seg_error);
        const auto r = surprise(*seg, cfgs[c], opts.library, predictor);
        row.score = r.score;
        for (const auto& d : r.diagnostics) notes[i].push_back({row.scenario_id, row.metric, d});
      } catch (const Error& e) {
        row.score = std::numeric_limits<double>::quiet_NaN();
        row.orientation = std::string(kErrorOrientation);
        notes[i].push_back({row.scenario_id, row.metric, e.what()});
      }
    }
  });
  ScoreTable t;
  t.rows = std::move(rows);
  for (auto& n : notes) t.diagnostics.insert(t.diagnostics.end(), n.begin(), n.end());
  return t;
}

ScoreTable batch_rules(const ScenarioSet& data, const Predictor& predictor, const RuleConfig& cfg, int threads) {
  std::vector<std::vector<ScoreRow>> rows(data.size());
  std::vector<std::vector<ScoreDiagnostic>> notes(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& id = data[i]->scenario_id;
    try {
      const auto scores = rule_scores(default_segment(data[i]), predictor, cfg);
      for (const auto name : kRuleNames) rows[i].push_back({id, std::string(name), scores.at(std::string(name))});
    } catch (const Error& e) {
      for (const auto name : kRuleNames) {
        rows[i].push_back({id, std::string(name), std::numeric_limits<double>::quiet_NaN(),
                           std::string(kErrorOrientation)});
        notes[i].push_back({id, std::string(name), e.what()});
      }
    }
  });
  ScoreTable t;
  for (std::size_t i = 0; i < data.size(); ++i) {
    t.rows.insert(t.rows.end(), rows[i].begin(), rows[i].end());
    t.diagnostics.insert(t.diagnostics.end(), notes[i].begin(), notes[i].end());
  }
  return t;
}

}  // namespace surprise
