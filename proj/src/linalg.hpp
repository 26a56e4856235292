/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_SRC_LINALG_HPP
#define MOGP_SRC_LINALG_HPP

#include <Eigen/Dense>
#include <string>

#include "mogp/errors.hpp"

namespace mogp::detail {

inline constexpr double kMaxRelJitter = 1e-4;

struct JitteredChol {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double added = 0.0; // absolute value added to the diagonal
};

/// Cholesky with escalating diagonal jitter: starts at base_rel * mean(diag)
/// and grows by decades up to kMaxRelJitter before failing with a
/// NumericalError naming `context`.
inline JitteredChol chol_with_jitter(const Eigen::MatrixXd& K, double base_rel,
                                     const std::string& context) {
  const double scale = K.diagonal().mean();
  double rel = base_rel;
  while (true) {
    Eigen::MatrixXd Kj = K;
    const double added = rel * scale;
    Kj.diagonal().array() += added;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) return {std::move(llt), added};
    if (rel >= kMaxRelJitter) {
      throw NumericalError("Cholesky factorization failed for " + context +
                           " even with relative jitter " +
                           std::to_string(rel));
    }
    rel *= 10.0;
  }
}

} // namespace mogp::detail

#endif
