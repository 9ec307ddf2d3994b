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

// Distribution-shift measures between two Gaussian mixtures.

#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "surprise/predictor.hpp"

namespace surprise {

enum class Metric { kL2, kKld, kW2 };

std::string_view to_string(Metric m);  // "l2", "kld", "w2"
Metric parse_metric(std::string_view token);

/// Symmetric PSD square root by eigendecomposition. Negative eigenvalues are
/// clamped to zero before rooting. Throws NumericError for input asymmetric
/// beyond 1e-9 or with an eigenvalue below -1e-6.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& sigma);

/// Squared 2-Wasserstein distance between two Gaussians:
/// |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2), clamped at 0.
double gaussian_w2_cost(const GaussianMode& a, const GaussianMode& b);

/// K1 x K2 matrix of pairwise Gaussian costs.
Eigen::MatrixXd w2_cost_matrix(const GmmPrediction& g1, const GmmPrediction& g2);

struct TransportPlan {
  Eigen::MatrixXd plan;
  double objective = 0.0;
};

/// Exact transportation simplex. Among the optimal vertices reachable by
/// zero-reduced-cost pivots the row-major lexicographically smallest plan is
/// returned. Throws ArgumentError when the marginal totals differ by more
/// than 1e-6.
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand);

/// Optimal transport objective between the mixtures under the Gaussian cost
/// (squared-distance scale).
double w2_gmm(const GmmPrediction& g1, const GmmPrediction& g2);
/// sqrt(w2_gmm).
double w2_gmm_distance(const GmmPrediction& g1, const GmmPrediction& g2);

struct KldEstimate {
  double value = 0.0;           // +inf when any sample has zero density under g2
  double standard_error = 0.0;
  std::size_t underflow_count = 0;
};

/// Monte-Carlo KL(g1 || g2) from `n_samples` draws of g1. Requires positive
/// definite covariances.
KldEstimate kld_gmm(const GmmPrediction& g1, const GmmPrediction& g2, int n_samples, std::uint64_t seed);

/// Sum over weight-sorted matched modes of |mu1 - mu2|^exponent. The shorter
/// mixture is padded with its last sorted mode.
double l2_topk(const GmmPrediction& g1, const GmmPrediction& g2, double exponent = 0.5);

}  // namespace surprise
