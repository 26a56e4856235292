/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_QUADRATURE_HPP
#define MOGP_QUADRATURE_HPP

#include <Eigen/Core>
#include <functional>

namespace mogp {

/// Gauss-Hermite rule of a given order.
///
/// Nodes are the roots of the physicists' Hermite polynomial H_n, stored in
/// ascending order and exactly symmetric about zero. Weights are stored
/// *normalized*: they sum to 1, i.e. the physicists' weights divided by
/// sqrt(pi), so that expectations under N(0,1) read
///   E[f] ~= sum_k w[k] * f(sqrt(2) * t[k])
/// with no stray pi factors at call sites.
struct GhRule {
  int order = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline constexpr int kDefaultQuadOrder = 20;
inline constexpr int kMaxQuadOrder = 200;

/// Build a Gauss-Hermite rule by eigendecomposition of the Jacobi matrix
/// (Golub-Welsch). Exact for polynomials of degree <= 2*order-1 under the
/// Gaussian weight. Throws std::invalid_argument for order outside
/// [1, kMaxQuadOrder].
GhRule gh_rule(int order);

/// The order-20 rule used as a default throughout the library.
const GhRule& default_gh_rule();

/// E_{N(mean, variance)}[f] by Gauss-Hermite quadrature. With variance == 0
/// this evaluates f(mean) directly. Throws std::invalid_argument on
/// non-finite mean/variance or variance < 0.
double expect_1d(const GhRule& rule, double mean, double variance,
                 const std::function<double(double)>& f);

/// Tensor-product expectation over two independent Gaussians.
double expect_2d(const GhRule& rule, const Eigen::Vector2d& means,
                 const Eigen::Vector2d& variances,
                 const std::function<double(double, double)>& f);

} // namespace mogp

#endif
