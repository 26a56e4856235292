/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_KERNEL_HPP
#define MOGP_KERNEL_HPP

#include <Eigen/Core>
#include <vector>

namespace mogp {

/// Squared-exponential covariance
///   k(x, x') = variance * exp(-1/2 * sum_i (x_i - x'_i)^2 / ell_i^2).
///
/// `lengthscales` has either one entry per input dimension (ARD) or a single
/// entry shared across dimensions. Kernels are immutable value objects; the
/// positivity of variance and lengthscales is maintained by exposing them to
/// optimizers on the log scale (see log_hyperparameters / with_log_hyperparameters).
class RbfKernel {
public:
  RbfKernel(double variance, Eigen::VectorXd lengthscales);

  /// Isotropic convenience constructor: one shared lengthscale.
  RbfKernel(double variance, double lengthscale);

  double variance() const { return variance_; }
  const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
  bool shared_lengthscale() const { return lengthscales_.size() == 1; }

  /// Lengthscale applied to input dimension i.
  double lengthscale(Eigen::Index i) const {
    return shared_lengthscale() ? lengthscales_[0] : lengthscales_[i];
  }

  /// Number of unconstrained hyperparameters: 1 (log variance) plus one log
  /// lengthscale per stored entry.
  Eigen::Index num_hyperparameters() const { return 1 + lengthscales_.size(); }

  /// (log variance, log lengthscales...) as a flat vector.
  Eigen::VectorXd log_hyperparameters() const;

  /// Rebuild the kernel from unconstrained hyperparameters.
  static RbfKernel from_log_hyperparameters(const Eigen::VectorXd& theta);

  /// k(x, x'). Throws std::invalid_argument on dimension mismatch or
  /// non-finite inputs.
  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  /// Gram matrix with entries k(X.row(i), Y.row(j)).
  Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const;

  /// Diagonal of gram(X, X); constant equal to variance for this kernel.
  Eigen::VectorXd gram_diag(const Eigen::MatrixXd& X) const;

  /// Derivatives of every Gram entry with respect to the unconstrained
  /// hyperparameters, in log_hyperparameters() order:
  ///   out[0]   = dK / d(log variance)      (= K itself)
  ///   out[1+i] = dK / d(log lengthscale_i)
  std::vector<Eigen::MatrixXd> gram_grad(const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& Y) const;

  /// sum_ij G(i,j) * dK(i,j)/dtheta for each unconstrained hyperparameter;
  /// equivalent to contracting gram_grad with G without materializing it.
  Eigen::VectorXd gram_grad_contract(const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& Y,
                                     const Eigen::MatrixXd& G) const;

  /// Gradient of k(x, z) with respect to the second argument z.
  Eigen::VectorXd eval_grad_arg2(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& z) const;

private:
  void check_dim(Eigen::Index p) const;

  double variance_;
  Eigen::VectorXd lengthscales_;
};

} // namespace mogp

#endif
