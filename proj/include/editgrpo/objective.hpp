// Copyright 2026 The editgrpo Authors
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

// Scalar pieces of the clipped group-relative objective.

#ifndef EDITGRPO_OBJECTIVE_HPP_
#define EDITGRPO_OBJECTIVE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "editgrpo/common.hpp"

namespace editgrpo {

/// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
inline double clipped_term(double rho, double advantage, double clip_eps) {
  const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(rho * advantage, clipped * advantage);
}

/// True when the clipped branch is strictly the minimum, i.e. the term has
/// zero gradient with respect to rho.
inline bool clip_active(double rho, double advantage, double clip_eps) {
  return (advantage > 0.0 && rho > 1.0 + clip_eps) || (advantage < 0.0 && rho < 1.0 - clip_eps);
}

/// KL(p || q) for categorical distributions given as log-probabilities.
inline double kl_from_logs(const Eigen::VectorXd& log_p, const Eigen::VectorXd& log_q) {
  return (log_p.array().exp() * (log_p - log_q).array()).sum();
}

/// KL(p || q) for strictly positive, normalized probability vectors.
inline double kl_term(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double tol = 1e-9) {
  if (p.size() != q.size() || p.size() == 0) throw InvalidInput("kl_term: size mismatch");
  if ((p.array() <= 0.0).any() || (q.array() <= 0.0).any())
    throw InvalidInput("kl_term: distributions must be strictly positive");
  if (std::abs(p.sum() - 1.0) > tol || std::abs(q.sum() - 1.0) > tol)
    throw InvalidInput("kl_term: distributions must be normalized");
  return (p.array() * (p.array() / q.array()).log()).sum();
}

}  // namespace editgrpo

#endif  // EDITGRPO_OBJECTIVE_HPP_
