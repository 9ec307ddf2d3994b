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

#include "surprise/shift_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "surprise/error.hpp"

namespace surprise {

namespace {

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

void require_same_dimension(const GmmPrediction& g1, const GmmPrediction& g2) {
  if (g1.modes.empty() || g2.modes.empty()) throw ArgumentError("mixtures must have at least one mode");
  if (g1.dimension() != g2.dimension())
    throw ArgumentError("mixture dimensions differ: " + std::to_string(g1.dimension()) + " vs " +
                        std::to_string(g2.dimension()));
}

Eigen::VectorXd weights_of(const GmmPrediction& g) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.modes.size()));
  for (std::size_t k = 0; k < g.modes.size(); ++k) w(static_cast<Eigen::Index>(k)) = g.modes[k].weight;
  return w;
}

// Gaussian cost with sqrt(a.covariance) supplied by the caller; `root_a` may be
// empty when both covariances are diagonal.
double w2_cost_with_root(const GaussianMode& a, const Eigen::MatrixXd& root_a, const GaussianMode& b) {
  if (a.mean.size() != b.mean.size()) throw ArgumentError("mode dimensions differ");
  if (a == b) return 0.0;
  const double mean_term = (a.mean - b.mean).squaredNorm();
  double trace_term = 0.0;
  if (is_diagonal(a.covariance) && is_diagonal(b.covariance)) {
    for (Eigen::Index d = 0; d < a.covariance.rows(); ++d) {
      const double s = std::sqrt(std::max(0.0, a.covariance(d, d))) - std::sqrt(std::max(0.0, b.covariance(d, d)));
      trace_term += s * s;
    }
  } else {
    Eigen::MatrixXd inner = root_a * b.covariance * root_a;
    inner = 0.5 * (inner + inner.transpose());
    trace_term = a.covariance.trace() + b.covariance.trace() - 2.0 * sqrt_psd(inner).trace();
  }
  return std::max(0.0, mean_term + trace_term);
}

// Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct NormalSampler {
  std::mt19937_64 rng;
  bool has_spare = false;
  double spare = 0.0;

  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
};

struct DensityTerm {
  double log_weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd lower;  // Cholesky factor
  double log_norm;        // -0.5 (d log 2pi + log det)
};

std::vector<DensityTerm> density_terms(const GmmPrediction& g) {
  std::vector<DensityTerm> terms;
  const double d = static_cast<double>(g.dimension());
  for (const auto& m : g.modes) {
    Eigen::LLT<Eigen::MatrixXd> llt(m.covariance);
    if (llt.info() != Eigen::Success) throw NumericError("KLD needs positive definite covariances");
    const Eigen::MatrixXd lower = llt.matrixL();
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    terms.push_back({m.weight > 0.0 ? std::log(m.weight) : -std::numeric_limits<double>::infinity(), m.mean, lower,
                     -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det)});
  }
  return terms;
}

double log_density(const std::vector<DensityTerm>& terms, const Eigen::VectorXd& x) {
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(terms.size());
  for (const auto& t : terms) {
    const Eigen::VectorXd z = t.lower.triangularView<Eigen::Lower>().solve(x - t.mean);
    const double l = t.log_weight + t.log_norm - 0.5 * z.squaredNorm();
    logs.push_back(l);
    peak = std::max(peak, l);
  }
  if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const double l : logs) sum += std::exp(l - peak);
  return peak + std::log(sum);
}

std::vector<std::size_t> weight_order(const GmmPrediction& g) {
  std::vector<std::size_t> idx(g.modes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return g.modes[a].weight > g.modes[b].weight; });
  return idx;
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kL2:
      return "l2";
    case Metric::kKld:
      return "kld";
    case Metric::kW2:
      return "w2";
  }
  return "w2";
}

Metric parse_metric(std::string_view token) {
  for (const auto m : {Metric::kL2, Metric::kKld, Metric::kW2})
    if (to_string(m) == token) return m;
  throw ArgumentError("unknown metric '" + std::string(token) + "'");
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw NumericError("sqrt_psd needs a square matrix");
  if (sigma.size() == 0) return sigma;
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw NumericError("sqrt_psd input is asymmetric");
  if (is_diagonal(sigma)) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols());
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
      if (sigma(i, i) < -1e-6) throw NumericError("sqrt_psd input has a negative eigenvalue");
      r(i, i) = std::sqrt(std::max(0.0, sigma(i, i)));
    }
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-6) throw NumericError("sqrt_psd input has a negative eigenvalue");
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd r = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

double gaussian_w2_cost(const GaussianMode& a, const GaussianMode& b) {
  if (a.mean.size() != b.mean.size()) throw ArgumentError("mode dimensions differ");
  if (a == b) return 0.0;
  const Eigen::MatrixXd root = is_diagonal(a.covariance) && is_diagonal(b.covariance) ? Eigen::MatrixXd()
                                                                                         : sqrt_psd(a.covariance);
  return w2_cost_with_root(a, root, b);
}

Eigen::MatrixXd w2_cost_matrix(const GmmPrediction& g1, const GmmPrediction& g2) {
  require_same_dimension(g1, g2);
  const auto k1 = static_cast<Eigen::Index>(g1.modes.size());
  const auto k2 = static_cast<Eigen::Index>(g2.modes.size());
  Eigen::MatrixXd cost(k1, k2);
  for (Eigen::Index i = 0; i < k1; ++i) {
    const auto& a = g1.modes[static_cast<std::size_t>(i)];
    Eigen::MatrixXd root;
    for (Eigen::Index j = 0; j < k2; ++j) {
      const auto& b = g2.modes[static_cast<std::size_t>(j)];
      if (root.size() == 0 && !(is_diagonal(a.covariance) && is_diagonal(b.covariance)) && !(a == b))
        root = sqrt_psd(a.covariance);
      cost(i, j) = w2_cost_with_root(a, root, b);
    }
  }
  return cost;
}

double w2_gmm(const GmmPrediction& g1, const GmmPrediction& g2) {
  require_same_dimension(g1, g2);
  if (g1.modes == g2.modes) return 0.0;
  return solve_transport(w2_cost_matrix(g1, g2), weights_of(g1), weights_of(g2)).objective;
}

double w2_gmm_distance(const GmmPrediction& g1, const GmmPrediction& g2) { return std::sqrt(w2_gmm(g1, g2)); }

KldEstimate kld_gmm(const GmmPrediction& g1, const GmmPrediction& g2, int n_samples, std::uint64_t seed) {
  require_same_dimension(g1, g2);
  if (n_samples < 1) throw ArgumentError("n_samples must be at least 1");
  if (g1.modes == g2.modes) return {};
  const auto p = density_terms(g1);
  const auto q = density_terms(g2);
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& m : g1.modes) cumulative.push_back(acc += m.weight);

  NormalSampler normal{std::mt19937_64(seed)};
  const Eigen::Index dim = g1.dimension();
  Eigen::VectorXd z(dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  KldEstimate out;
  for (int s = 0; s < n_samples; ++s) {
    const double u = uniform01(normal.rng) * acc;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                             cumulative.begin());
    k = std::min(k, g1.modes.size() - 1);
    while (g1.modes[k].weight <= 0.0 && k + 1 < g1.modes.size()) ++k;
    for (Eigen::Index d = 0; d < dim; ++d) z(d) = normal.next();
    const Eigen::VectorXd x = p[k].mean + p[k].lower * z;
    const double lq = log_density(q, x);
    if (!std::isfinite(lq)) {
      ++out.underflow_count;
      continue;
    }
    const double r = log_density(p, x) - lq;
    sum += r;
    sum_sq += r * r;
  }
  if (out.underflow_count > 0) {
    out.value = std::numeric_limits<double>::infinity();
    out.standard_error = std::numeric_limits<double>::infinity();
    return out;
  }
  const double n = static_cast<double>(n_samples);
  out.value = sum / n;
  const double var = n > 1.0 ? std::max(0.0, (sum_sq - n * out.value * out.value) / (n - 1.0)) : 0.0;
  out.standard_error = std::sqrt(var / n);
  return out;
}

double l2_topk(const GmmPrediction& g1, const GmmPrediction& g2, double exponent) {
  require_same_dimension(g1, g2);
  const auto o1 = weight_order(g1);
  const auto o2 = weight_order(g2);
  const std::size_t k = std::max(o1.size(), o2.size());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = g1.modes[o1[std::min(i, o1.size() - 1)]];
    const auto& b = g2.modes[o2[std::min(i, o2.size() - 1)]];
    const double d = (a.mean - b.mean).norm();
    total += d == 0.0 ? 0.0 : std::pow(d, exponent);
  }
  return total;
}

}  // namespace surprise
