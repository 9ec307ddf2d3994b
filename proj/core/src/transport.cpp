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

// Transportation simplex on the bipartite basis tree (MODI potentials).

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "surprise/error.hpp"
#include "surprise/shift_metrics.hpp"

namespace surprise {

namespace {

using Cell = std::pair<int, int>;

struct Tableau {
  int m = 0;
  int n = 0;
  Eigen::MatrixXd x;
  std::vector<Cell> basis;  // m + n - 1 cells forming a spanning tree

  bool is_basic(int i, int j) const {
    return std::find(basis.begin(), basis.end(), Cell{i, j}) != basis.end();
  }
};

// Staircase start; exactly one index advances per allocation so the basis is
// a spanning tree even when allocations are zero.
Tableau northwest_corner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Tableau t;
  t.m = static_cast<int>(a.size());
  t.n = static_cast<int>(b.size());
  t.x = Eigen::MatrixXd::Zero(t.m, t.n);
  Eigen::VectorXd ra = a;
  Eigen::VectorXd rb = b;
  int i = 0;
  int j = 0;
  while (true) {
    const double q = std::min(ra(i), rb(j));
    t.x(i, j) = q;
    ra(i) -= q;
    rb(j) -= q;
    t.basis.push_back({i, j});
    if (i == t.m - 1 && j == t.n - 1) break;
    if (j == t.n - 1 || (i < t.m - 1 && ra(i) <= rb(j)))
      ++i;
    else
      ++j;
  }
  return t;
}

void potentials(const Tableau& t, const Eigen::MatrixXd& c, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  u = Eigen::VectorXd::Constant(t.m, std::nan(""));
  v = Eigen::VectorXd::Constant(t.n, std::nan(""));
  u(0) = 0.0;
  for (std::size_t settled = 1; settled < static_cast<std::size_t>(t.m + t.n);) {
    const std::size_t before = settled;
    for (const auto& [i, j] : t.basis) {
      if (!std::isnan(u(i)) && std::isnan(v(j))) {
        v(j) = c(i, j) - u(i);
        ++settled;
      } else if (std::isnan(u(i)) && !std::isnan(v(j))) {
        u(i) = c(i, j) - v(j);
        ++settled;
      }
    }
    if (settled == before) throw NumericError("transport basis is not a spanning tree");
  }
}

// Basis cells on the tree path from row p to column q, in walk order.
std::vector<Cell> tree_path(const Tableau& t, int p, int q) {
  const int nodes = t.m + t.n;
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nodes));
  for (int e = 0; e < static_cast<int>(t.basis.size()); ++e) {
    const auto [i, j] = t.basis[static_cast<std::size_t>(e)];
    adj[static_cast<std::size_t>(i)].push_back({t.m + j, e});
    adj[static_cast<std::size_t>(t.m + j)].push_back({i, e});
  }
  std::vector<int> via(static_cast<std::size_t>(nodes), -1);
  std::vector<int> prev(static_cast<std::size_t>(nodes), -1);
  std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
  std::deque<int> frontier{p};
  seen[static_cast<std::size_t>(p)] = 1;
  const int goal = t.m + q;
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop_front();
    if (node == goal) break;
    for (const auto& [next, e] : adj[static_cast<std::size_t>(node)]) {
      if (seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = 1;
      prev[static_cast<std::size_t>(next)] = node;
      via[static_cast<std::size_t>(next)] = e;
      frontier.push_back(next);
    }
  }
  if (!seen[static_cast<std::size_t>(goal)]) throw NumericError("transport basis is disconnected");
  std::vector<Cell> path;
  for (int node = goal; node != p; node = prev[static_cast<std::size_t>(node)])
    path.push_back(t.basis[static_cast<std::size_t>(via[static_cast<std::size_t>(node)])]);
  std::reverse(path.begin(), path.end());
  return path;
}

// Brings (p, q) into the basis. Returns the step length theta.
double pivot(Tableau& t, int p, int q) {
  const auto path = tree_path(t, p, q);
  // Along the cycle (p,q) -> path the signs alternate starting with '-'.
  double theta = std::numeric_limits<double>::infinity();
  Cell leaving{-1, -1};
  for (std::size_t k = 0; k < path.size(); k += 2) {
    const auto [i, j] = path[k];
    const double val = t.x(i, j);
    if (val < theta || (val == theta && path[k] < leaving)) {
      theta = val;
      leaving = path[k];
    }
  }
  t.x(p, q) += theta;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto [i, j] = path[k];
    t.x(i, j) += (k % 2 == 0 ? -theta : theta);
  }
  t.x(leaving.first, leaving.second) = 0.0;
  *std::find(t.basis.begin(), t.basis.end(), leaving) = Cell{p, q};
  return theta;
}

bool lexicographically_less(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) < b(i, j) - tol) return true;
      if (a(i, j) > b(i, j) + tol) return false;
    }
  return false;
}

std::vector<Cell> sorted_basis(const Tableau& t) {
  auto cells = t.basis;
  std::sort(cells.begin(), cells.end());
  return cells;
}

double objective_of(const Eigen::MatrixXd& c, const Eigen::MatrixXd& x) { return (c.array() * x.array()).sum(); }

constexpr int kMaxAlternateBases = 256;

}  // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw ArgumentError("transport marginals must be non-empty");
  if (cost.rows() != m || cost.cols() != n) throw ArgumentError("cost matrix shape differs from the marginals");
  if (!cost.allFinite()) throw ArgumentError("cost matrix has non-finite entries");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw ArgumentError("transport marginals must be non-negative");
  const double sa = supply.sum();
  const double sb = demand.sum();
  if (std::abs(sa - sb) > 1e-6) throw ArgumentError("infeasible marginals: totals differ by more than 1e-6");
  const Eigen::VectorXd b = sb > 0.0 ? Eigen::VectorXd(demand * (sa / sb)) : demand;

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-11 * scale;

  Tableau t = northwest_corner(supply, b);
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  int degenerate_streak = 0;
  const int bland_after = 2 * m * n;
  for (int iter = 0;; ++iter) {
    if (iter > 50 * m * n + 1000) throw NumericError("transport simplex failed to converge");
    potentials(t, cost, u, v);
    Cell entering{-1, -1};
    double best = -tol;
    const bool bland = degenerate_streak > bland_after;
    for (int i = 0; i < m && !(bland && entering.first >= 0); ++i)
      for (int j = 0; j < n; ++j) {
        const double d = cost(i, j) - u(i) - v(j);
        if (d < best && !t.is_basic(i, j)) {
          entering = {i, j};
          if (bland) break;
          best = d;
        }
      }
    if (entering.first < 0) break;
    const double theta = pivot(t, entering.first, entering.second);
    degenerate_streak = theta > 0.0 ? 0 : degenerate_streak + 1;
  }

  // Walk the face of optimal vertices for the lexicographic tie-break.
  Eigen::MatrixXd best_plan = t.x;
  std::set<std::vector<Cell>> visited{sorted_basis(t)};
  std::deque<Tableau> queue{t};
  while (!queue.empty() && static_cast<int>(visited.size()) < kMaxAlternateBases) {
    Tableau cur = std::move(queue.front());
    queue.pop_front();
    potentials(cur, cost, u, v);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        if (cur.is_basic(i, j) || std::abs(cost(i, j) - u(i) - v(j)) > tol) continue;
        Tableau next = cur;
        pivot(next, i, j);
        if (!visited.insert(sorted_basis(next)).second) continue;
        if (lexicographically_less(next.x, best_plan, 1e-12)) best_plan = next.x;
        queue.push_back(std::move(next));
        if (static_cast<int>(visited.size()) >= kMaxAlternateBases) break;
      }
  }

  TransportPlan out;
  out.plan = best_plan.cwiseMax(0.0);
  out.objective = objective_of(cost, out.plan);
  return out;
}

}  // namespace surprise
