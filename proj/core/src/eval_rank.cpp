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

#include "surprise/eval_rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json_io.hpp"
#include "surprise/error.hpp"

namespace surprise {

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::kA:
      return "A";
    case Choice::kB:
      return "B";
    case Choice::kSkip:
      return "skip";
  }
  return "skip";
}

Choice parse_choice(std::string_view token) {
  if (token == "A") return Choice::kA;
  if (token == "B") return Choice::kB;
  if (token == "skip") return Choice::kSkip;
  throw ArgumentError("invalid choice '" + std::string(token) + "' (expected A, B or skip)");
}

std::string preference_to_json(const PreferenceRecord& r) {
  const detail::json j{{"annotator", r.annotator},
                       {"a", r.a},
                       {"b", r.b},
                       {"choice", std::string(to_string(r.choice))},
                       {"ts", r.ts}};
  return j.dump();
}

std::vector<PreferenceRecord> load_preferences(const std::filesystem::path& path) {
  std::vector<PreferenceRecord> out;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    try {
      const auto j = detail::json::parse(line);
      PreferenceRecord r;
      r.annotator = detail::require_string(j, "annotator");
      r.a = detail::require_string(j, "a");
      r.b = detail::require_string(j, "b");
      r.choice = parse_choice(detail::require_string(j, "choice"));
      const auto& ts = detail::require(j, "ts");
      if (!ts.is_number_integer()) throw DataError("field 'ts' must be an integer");
      r.ts = ts.get<std::int64_t>();
      if (r.a == r.b) throw DataError("record compares scenario '" + r.a + "' with itself");
      out.push_back(std::move(r));
    } catch (const detail::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return out;
}

void save_preferences(const std::filesystem::path& path, const std::vector<PreferenceRecord>& records) {
  auto out = detail::open_for_write(path);
  for (const auto& r : records) out << preference_to_json(r) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

FeatureSet featurize(const ScoreTable& table, const std::vector<std::string>& names) {
  if (names.empty()) throw ArgumentError("feature set is empty");
  const auto metrics = table.by_metric();
  std::set<std::string> ids;
  for (const auto& r : table.rows) ids.insert(r.scenario_id);
  FeatureSet fs;
  fs.names = names;
  for (const auto& name : names)
    if (!metrics.contains(name)) throw DataError("missing feature '" + name + "' in score table");
  for (const auto& id : ids) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& col = metrics.at(names[k]);
      const auto it = col.find(id);
      if (it == col.end()) throw DataError("missing feature '" + names[k] + "' for scenario '" + id + "'");
      row(static_cast<Eigen::Index>(k)) = it->second;
    }
    fs.rows.emplace(id, std::move(row));
  }
  return fs;
}

namespace {

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

struct Objective {
  Eigen::MatrixXd diffs;  // winner minus loser, one row per record
  double lambda;

  double loss(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd m = diffs * w;
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) s += softplus_neg(m(i));
    return s / static_cast<double>(m.size()) + 0.5 * lambda * w.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd m = diffs * w;
    Eigen::VectorXd coef(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) coef(i) = -sigmoid(-m(i));
    return diffs.transpose() * coef / static_cast<double>(m.size()) + lambda * w;
  }
};

}  // namespace

RewardModel fit_reward(const std::vector<PreferenceRecord>& prefs, const FeatureSet& features,
                       const FitOptions& opts) {
  std::vector<const PreferenceRecord*> usable;
  for (const auto& r : prefs)
    if (r.choice != Choice::kSkip) usable.push_back(&r);
  if (usable.empty()) throw DataError("no non-skip preference records to train on");
  const auto dim = static_cast<Eigen::Index>(features.names.size());

  std::set<std::string> train_ids;
  for (const auto* r : usable)
    for (const auto* id : {&r->a, &r->b}) {
      if (!features.rows.contains(*id)) throw DataError("no features for scenario '" + *id + "'");
      train_ids.insert(*id);
    }

  RewardModel model;
  model.features = features.names;
  model.seed = opts.seed;
  model.records = usable.size();
  auto& st = model.standardization;
  st.mean = Eigen::VectorXd::Zero(dim);
  st.scale = Eigen::VectorXd::Zero(dim);
  for (const auto& id : train_ids) st.mean += features.rows.at(id);
  st.mean /= static_cast<double>(train_ids.size());
  for (const auto& id : train_ids) st.scale += (features.rows.at(id) - st.mean).cwiseAbs2();
  st.scale = (st.scale / static_cast<double>(train_ids.size())).cwiseSqrt();
  for (Eigen::Index k = 0; k < dim; ++k)
    if (!(st.scale(k) > 0.0) || !std::isfinite(st.scale(k))) st.scale(k) = 1.0;

  Objective obj{Eigen::MatrixXd(static_cast<Eigen::Index>(usable.size()), dim), opts.lambda};
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto* r = usable[i];
    const Eigen::VectorXd xa = st.apply(features.rows.at(r->a));
    const Eigen::VectorXd xb = st.apply(features.rows.at(r->b));
    obj.diffs.row(static_cast<Eigen::Index>(i)) = (r->choice == Choice::kA ? xa - xb : xb - xa).transpose();
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double loss = obj.loss(w);
  Eigen::VectorXd g = obj.gradient(w);
  int iter = 0;
  for (; iter < opts.max_iterations && g.norm() >= opts.gradient_tolerance; ++iter) {
    if (!std::isfinite(loss)) throw NumericError("reward-model loss is not finite");
    model.loss_curve.push_back(loss);
    double step = opts.step;
    Eigen::VectorXd next;
    double next_loss = 0.0;
    for (int halvings = 0;; ++halvings) {
      next = w - step * g;
      next_loss = obj.loss(next);
      if (next_loss <= loss) break;
      if (halvings >= 60) {
        next = w;
        next_loss = loss;
        break;
      }
      step *= 0.5;
    }
    if (next_loss == loss && next == w) break;
    w = std::move(next);
    loss = next_loss;
    g = obj.gradient(w);
  }
  if (!std::isfinite(loss)) throw NumericError("reward-model loss is not finite");
  model.loss_curve.push_back(loss);
  model.weights = w;
  model.iterations = iter;
  model.gradient_norm = g.norm();
  return model;
}

void RewardModel::save(const std::filesystem::path& path) const {
  using detail::json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const json j{{"features", features},
               {"weights", vec(weights)},
               {"bias", bias},
               {"standardization", {{"mean", vec(standardization.mean)}, {"scale", vec(standardization.scale)}}},
               {"meta",
                {{"iterations", iterations},
                 {"gradient_norm", gradient_norm},
                 {"records", records},
                 {"seed", seed},
                 {"loss_curve", loss_curve}}}};
  auto out = detail::open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

RewardModel RewardModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    const auto j = detail::json::parse(in);
    RewardModel m;
    m.features = detail::require(j, "features").get<std::vector<std::string>>();
    auto vec = [&](const detail::json& v, const char* what) {
      const auto raw = v.get<std::vector<double>>();
      if (raw.size() != m.features.size())
        throw DataError(std::string(what) + " length differs from the feature count");
      for (const double x : raw)
        if (!std::isfinite(x)) throw DataError(std::string(what) + " has non-finite entries");
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size())));
    };
    m.weights = vec(detail::require(j, "weights"), "weights");
    m.bias = detail::require_number(j, "bias");
    const auto& st = detail::require(j, "standardization");
    m.standardization.mean = vec(detail::require(st, "mean"), "standardization mean");
    m.standardization.scale = vec(detail::require(st, "scale"), "standardization scale");
    if (const auto it = j.find("meta"); it != j.end()) {
      m.iterations = it->value("iterations", 0);
      m.gradient_norm = it->value("gradient_norm", 0.0);
      m.records = it->value("records", std::size_t{0});
      m.seed = it->value("seed", std::uint64_t{0});
      m.loss_curve = it->value("loss_curve", std::vector<double>{});
    }
    return m;
  } catch (const detail::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Ranking rank_by_scores(const std::map<std::string, double>& scores, const std::string& metric) {
  Ranking r;
  r.metric = metric;
  for (const auto& [id, s] : scores) r.ids.push_back(id);
  std::stable_sort(r.ids.begin(), r.ids.end(),
                   [&](const std::string& a, const std::string& b) { return scores.at(a) > scores.at(b); });
  for (std::size_t i = 0; i < r.ids.size(); ++i) r.rank[r.ids[i]] = static_cast<int>(i) + 1;
  return r;
}

Ranking rank_dataset(const RewardModel& model, const FeatureSet& features) {
  if (features.names != model.features) throw DataError("feature names differ from the model's features");
  std::map<std::string, double> scores;
  for (const auto& [id, row] : features.rows) scores[id] = model.score(row);
  return rank_by_scores(scores, "reward");
}

void save_ranking(const std::filesystem::path& path, const Ranking& r, const std::map<std::string, double>& scores) {
  auto out = detail::open_for_write(path);
  out << "rank,scenario_id,score\n";
  for (const auto& id : r.ids) {
    const auto it = scores.find(id);
    out << r.rank.at(id) << ',' << id << ',' << (it == scores.end() ? std::string() : detail::format_double(it->second))
        << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Ranking load_ranking(const std::filesystem::path& path, std::map<std::string, double>* scores) {
  Ranking r;
  r.metric = path.stem().string();
  bool header = true;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (header) {
      header = false;
      return;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw DataError(path.string() + ":" + std::to_string(number) + ": expected rank,scenario_id,score");
    const std::string id(line.substr(c1 + 1, c2 - c1 - 1));
    r.ids.push_back(id);
    r.rank[id] = static_cast<int>(r.ids.size());
    if (scores && c2 + 1 < line.size()) (*scores)[id] = std::stod(std::string(line.substr(c2 + 1)));
  });
  return r;
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("zero rank variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double spearman(const Ranking& x, const Ranking& y) {
  if (x.size() < 2) throw ArgumentError("spearman needs at least 2 items");
  if (x.size() != y.size()) throw ArgumentError("rankings cover different id sets");
  std::vector<double> rx;
  std::vector<double> ry;
  for (const auto& [id, r] : x.rank) {
    const auto it = y.rank.find(id);
    if (it == y.rank.end()) throw ArgumentError("id '" + id + "' missing from the second ranking");
    rx.push_back(r);
    ry.push_back(it->second);
  }
  return pearson(rx, ry);
}

double spearman_scores(const std::map<std::string, double>& x, const std::map<std::string, double>& y) {
  if (x.size() < 2) throw ArgumentError("spearman needs at least 2 items");
  if (x.size() != y.size()) throw ArgumentError("score maps cover different id sets");
  std::vector<double> vx;
  std::vector<double> vy;
  for (const auto& [id, v] : x) {
    const auto it = y.find(id);
    if (it == y.end()) throw ArgumentError("id '" + id + "' missing from the second score map");
    vx.push_back(v);
    vy.push_back(it->second);
  }
  return pearson(fractional_ranks(vx), fractional_ranks(vy));
}

double auc_roc(const std::map<std::string, double>& scores, const std::map<std::string, bool>& labels) {
  std::vector<double> values;
  std::vector<bool> positive;
  for (const auto& [id, label] : labels) {
    const auto it = scores.find(id);
    if (it == scores.end()) throw ArgumentError("no score for labelled id '" + id + "'");
    values.push_back(it->second);
    positive.push_back(label);
  }
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double n_neg = static_cast<double>(positive.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw ArgumentError("auc_roc needs both classes");
  const auto ranks = fractional_ranks(values);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (positive[i]) rank_sum += ranks[i];
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::map<std::string, bool> derive_labels(const Ranking& r, double top_frac) {
  if (!(top_frac > 0.0 && top_frac < 1.0)) throw ArgumentError("top_frac must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(std::ceil(top_frac * static_cast<double>(r.size()) - 1e-9));
  std::map<std::string, bool> out;
  for (std::size_t i = 0; i < r.ids.size(); ++i) out[r.ids[i]] = i < n;
  return out;
}

}  // namespace surprise
