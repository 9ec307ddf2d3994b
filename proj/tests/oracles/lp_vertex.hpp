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

// Brute-force reference for small transportation problems: enumerate every
// basis of the equality system, keep the nonnegative basic solutions and
// return the cheapest one.

#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct VertexResult {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd plan;
  int vertices = 0;
};

inline VertexResult transport_by_vertices(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                                          const Eigen::VectorXd& demand) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  const int vars = m * n;
  // Row constraints followed by all column constraints but the last (which
  // is implied by the others).
  const int rows = m + n - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, i * n + j) = 1.0;
    b(i) = supply(i);
  }
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i < m; ++i) a(m + j, i * n + j) = 1.0;
    b(m + j) = demand(j);
  }

  VertexResult best;
  std::vector<int> pick(static_cast<std::size_t>(rows));
  // Iterate over all subsets of size `rows` in lexicographic order.
  for (int k = 0; k < rows; ++k) pick[static_cast<std::size_t>(k)] = k;
  while (true) {
    Eigen::MatrixXd sub(rows, rows);
    for (int k = 0; k < rows; ++k) sub.col(k) = a.col(pick[static_cast<std::size_t>(k)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() == rows) {
      const Eigen::VectorXd xb = lu.solve(b);
      if (xb.minCoeff() >= -1e-12) {
        Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
        for (int k = 0; k < rows; ++k) {
          const int v = pick[static_cast<std::size_t>(k)];
          plan(v / n, v % n) = std::max(0.0, xb(k));
        }
        const double obj = (plan.array() * cost.array()).sum();
        ++best.vertices;
        if (obj < best.objective) {
          best.objective = obj;
          best.plan = plan;
        }
      }
    }
    int k = rows - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == vars - rows + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int q = k + 1; q < rows; ++q) pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
  }
  return best;
}

}  // namespace oracle
