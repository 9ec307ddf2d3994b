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

// Closed forms for Gaussian divergences computed along routes that do not
// share code with the library.

#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace oracle {

// Bures term through the eigenvalues of S1 S2: tr (S1^1/2 S2 S1^1/2)^1/2 is
// the sum of square roots of the (real, nonnegative) eigenvalues of S1 S2.
inline double w2_squared(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                         const Eigen::MatrixXd& s2) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(s1 * s2);
  double cross = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) cross += std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  return (m1 - m2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * cross;
}

inline double kl_gaussian(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1, const Eigen::VectorXd& m2,
                          const Eigen::MatrixXd& s2) {
  const double k = static_cast<double>(m1.size());
  const Eigen::MatrixXd inv2 = s2.inverse();
  const Eigen::VectorXd d = m2 - m1;
  return 0.5 * ((inv2 * s1).trace() + d.dot(inv2 * d) - k + std::log(s2.determinant() / s1.determinant()));
}

}  // namespace oracle
