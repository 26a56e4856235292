/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mogp {

RbfKernel::RbfKernel(double variance, Eigen::VectorXd lengthscales)
    : variance_(variance), lengthscales_(std::move(lengthscales)) {
  if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
    throw std::invalid_argument("RbfKernel: variance must be positive");
  }
  if (lengthscales_.size() == 0) {
    throw std::invalid_argument("RbfKernel: empty lengthscale vector");
  }
  for (Eigen::Index i = 0; i < lengthscales_.size(); ++i) {
    if (!(lengthscales_[i] > 0.0) || !std::isfinite(lengthscales_[i])) {
      throw std::invalid_argument("RbfKernel: lengthscale " +
                                  std::to_string(i) + " must be positive");
    }
  }
}

RbfKernel::RbfKernel(double variance, double lengthscale)
    : RbfKernel(variance, Eigen::VectorXd::Constant(1, lengthscale)) {}

Eigen::VectorXd RbfKernel::log_hyperparameters() const {
  Eigen::VectorXd theta(num_hyperparameters());
  theta[0] = std::log(variance_);
  theta.tail(lengthscales_.size()) = lengthscales_.array().log();
  return theta;
}

RbfKernel RbfKernel::from_log_hyperparameters(const Eigen::VectorXd& theta) {
  if (theta.size() < 2) {
    throw std::invalid_argument("RbfKernel: need log variance plus at least one lengthscale");
  }
  return RbfKernel(std::exp(theta[0]),
                   theta.tail(theta.size() - 1).array().exp().matrix());
}

void RbfKernel::check_dim(Eigen::Index p) const {
  if (!shared_lengthscale() && p != lengthscales_.size()) {
    throw std::invalid_argument(
        "RbfKernel: input dimension " + std::to_string(p) +
        " does not match lengthscale count " +
        std::to_string(lengthscales_.size()));
  }
}

double RbfKernel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != y.size()) {
    throw std::invalid_argument("RbfKernel::eval: input dimension mismatch");
  }
  check_dim(x.size());
  if (!x.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("RbfKernel::eval: non-finite input");
  }
  double z = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x[i] - y[i]) / lengthscale(i);
    z += d * d;
  }
  return variance_ * std::exp(-0.5 * z);
}

Eigen::MatrixXd RbfKernel::gram(const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y) const {
  if (X.cols() != Y.cols()) {
    throw std::invalid_argument("RbfKernel::gram: input dimension mismatch");
  }
  check_dim(X.cols());
  const Eigen::Index p = X.cols();
  Eigen::ArrayXd inv_ell(p);
  for (Eigen::Index i = 0; i < p; ++i) inv_ell[i] = 1.0 / lengthscale(i);

  // Entrywise over pre-scaled inputs. Squared differences make each entry a
  // symmetric function of its two rows down to the last bit, so
  // gram(X, Y) == gram(Y, X)^T holds exactly.
  const Eigen::MatrixXd Xs = X.array().rowwise() * inv_ell.transpose();
  const Eigen::MatrixXd Ys = Y.array().rowwise() * inv_ell.transpose();
  Eigen::MatrixXd K(X.rows(), Y.rows());
  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    const Eigen::RowVectorXd y = Ys.row(j);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      K(i, j) = variance_ * std::exp(-0.5 * (Xs.row(i) - y).squaredNorm());
    }
  }
  return K;
}

Eigen::VectorXd RbfKernel::gram_diag(const Eigen::MatrixXd& X) const {
  check_dim(X.cols());
  return Eigen::VectorXd::Constant(X.rows(), variance_);
}

std::vector<Eigen::MatrixXd> RbfKernel::gram_grad(
    const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const {
  const Eigen::MatrixXd K = gram(X, Y);
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(1 + lengthscales_.size());
  grads.push_back(K); // K is linear in the variance

  if (shared_lengthscale()) {
    // d K / d log ell = K .* (scaled squared distance)
    const double inv2 = 1.0 / (lengthscales_[0] * lengthscales_[0]);
    Eigen::MatrixXd d2(X.rows(), Y.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < Y.rows(); ++j) {
        d2(i, j) = (X.row(i) - Y.row(j)).squaredNorm() * inv2;
      }
    }
    grads.push_back(K.cwiseProduct(d2));
    return grads;
  }

  for (Eigen::Index l = 0; l < lengthscales_.size(); ++l) {
    const double inv2 = 1.0 / (lengthscales_[l] * lengthscales_[l]);
    Eigen::MatrixXd dl = (X.col(l).replicate(1, Y.rows()).rowwise() -
                          Y.col(l).transpose())
                             .array()
                             .square() *
                         inv2;
    grads.push_back(K.cwiseProduct(dl));
  }
  return grads;
}

Eigen::VectorXd RbfKernel::gram_grad_contract(const Eigen::MatrixXd& X,
                                              const Eigen::MatrixXd& Y,
                                              const Eigen::MatrixXd& G) const {
  if (G.rows() != X.rows() || G.cols() != Y.rows()) {
    throw std::invalid_argument("gram_grad_contract: gradient shape mismatch");
  }
  const Eigen::MatrixXd K = gram(X, Y);
  const Eigen::MatrixXd GK = G.cwiseProduct(K);
  Eigen::VectorXd out(num_hyperparameters());
  out[0] = GK.sum();

  if (shared_lengthscale()) {
    const double inv2 =
        1.0 / (lengthscales_[0] * lengthscales_[0]);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < Y.rows(); ++j) {
        acc += GK(i, j) * (X.row(i) - Y.row(j)).squaredNorm() * inv2;
      }
    }
    out[1] = acc;
    return out;
  }

  for (Eigen::Index l = 0; l < lengthscales_.size(); ++l) {
    const double inv2 = 1.0 / (lengthscales_[l] * lengthscales_[l]);
    // sum_ij GK(i,j) (x_il - y_jl)^2
    //   = sum_i x_il^2 r_i + sum_j y_jl^2 c_j - 2 x_l' GK y_l
    const Eigen::VectorXd r = GK.rowwise().sum();
    const Eigen::VectorXd c = GK.colwise().sum();
    const double acc = X.col(l).array().square().matrix().dot(r) +
                       Y.col(l).array().square().matrix().dot(c) -
                       2.0 * X.col(l).dot(GK * Y.col(l));
    out[1 + l] = acc * inv2;
  }
  return out;
}

Eigen::VectorXd RbfKernel::eval_grad_arg2(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& z) const {
  const double k = eval(x, z);
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ell = lengthscale(i);
    g[i] = k * (x[i] - z[i]) / (ell * ell);
  }
  return g;
}

} // namespace mogp
