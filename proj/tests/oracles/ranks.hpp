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

// Quadratic-time references for rank statistics.

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

// Average 1-based rank: 1 + (#strictly smaller) + (#equal others) / 2.
inline std::vector<double> brute_fractional_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j == i) continue;
      if (v[j] < v[i]) less += 1.0;
      else if (v[j] == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + equal / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(brute_fractional_ranks(x), brute_fractional_ranks(y));
}

// 1 - 6 sum d^2 / (n (n^2 - 1)), valid without ties.
inline double spearman_d2(const std::vector<double>& rx, const std::vector<double>& ry) {
  const double n = static_cast<double>(rx.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Fraction of positive/negative pairs ordered correctly, ties one half.
inline double pair_count_auc(const std::map<std::string, double>& scores, const std::map<std::string, bool>& labels) {
  double good = 0.0, pairs = 0.0;
  for (const auto& [p, lp] : labels) {
    if (!lp) continue;
    for (const auto& [q, lq] : labels) {
      if (lq) continue;
      pairs += 1.0;
      const double sp = scores.at(p), sq = scores.at(q);
      good += sp > sq ? 1.0 : (sp == sq ? 0.5 : 0.0);
    }
  }
  return good / pairs;
}

}  // namespace oracle
