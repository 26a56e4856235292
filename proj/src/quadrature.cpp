/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mogp {

GhRule gh_rule(int order) {
  if (order < 1 || order > kMaxQuadOrder) {
    throw std::invalid_argument("gh_rule: order " + std::to_string(order) +
                                " outside [1, " +
                                std::to_string(kMaxQuadOrder) + "]");
  }

  GhRule rule;
  rule.order = order;
  if (order == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }

  // Jacobi matrix of the (physicists') Hermite recurrence: zero diagonal,
  // off-diagonal sqrt(k/2). Eigenvalues are the nodes; squared first
  // eigenvector components are the normalized weights.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("gh_rule: eigendecomposition failed");
  }

  rule.nodes = eig.eigenvalues(); // ascending
  rule.weights = eig.eigenvectors().row(0).array().square();

  // The spectrum is symmetric about zero; enforce the symmetry exactly so
  // that odd moments vanish identically.
  for (int i = 0, j = order - 1; i < j; ++i, --j) {
    const double t = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -t;
    rule.nodes[j] = t;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

const GhRule& default_gh_rule() {
  static const GhRule rule = gh_rule(kDefaultQuadOrder);
  return rule;
}

namespace {

void check_moments(double mean, double variance, const char* where) {
  if (!std::isfinite(mean) || !std::isfinite(variance)) {
    throw std::invalid_argument(std::string(where) +
                                ": non-finite mean or variance");
  }
  if (variance < 0.0) {
    throw std::invalid_argument(std::string(where) + ": negative variance " +
                                std::to_string(variance));
  }
}

} // namespace

double expect_1d(const GhRule& rule, double mean, double variance,
                 const std::function<double(double)>& f) {
  check_moments(mean, variance, "expect_1d");
  if (variance == 0.0) return f(mean);
  const double scale = std::sqrt(2.0 * variance);
  double acc = 0.0;
  for (int k = 0; k < rule.order; ++k) {
    acc += rule.weights[k] * f(mean + scale * rule.nodes[k]);
  }
  return acc;
}

double expect_2d(const GhRule& rule, const Eigen::Vector2d& means,
                 const Eigen::Vector2d& variances,
                 const std::function<double(double, double)>& f) {
  check_moments(means[0], variances[0], "expect_2d");
  check_moments(means[1], variances[1], "expect_2d");
  const double s0 = std::sqrt(2.0 * variances[0]);
  const double s1 = std::sqrt(2.0 * variances[1]);
  // Degenerate dimensions collapse to a single midpoint evaluation.
  if (variances[0] == 0.0 && variances[1] == 0.0) return f(means[0], means[1]);
  if (variances[0] == 0.0) {
    return expect_1d(rule, means[1], variances[1],
                     [&](double y) { return f(means[0], y); });
  }
  if (variances[1] == 0.0) {
    return expect_1d(rule, means[0], variances[0],
                     [&](double x) { return f(x, means[1]); });
  }
  double acc = 0.0;
  for (int a = 0; a < rule.order; ++a) {
    const double x = means[0] + s0 * rule.nodes[a];
    double inner = 0.0;
    for (int b = 0; b < rule.order; ++b) {
      inner += rule.weights[b] * f(x, means[1] + s1 * rule.nodes[b]);
    }
    acc += rule.weights[a] * inner;
  }
  return acc;
}

} // namespace mogp
