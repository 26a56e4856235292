/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_PRIOR_HPP
#define MOGP_PRIOR_HPP

#include <Eigen/Core>
#include <vector>

#include "mogp/dataset.hpp"
#include "mogp/kernel.hpp"
#include "mogp/likelihood.hpp"
#include "mogp/rng.hpp"

namespace mogp {

/// Mixing coefficients of the latent-factor prior. Every latent parameter
/// function is a linear combination of Q independent latent processes:
/// row i of A holds the loadings of LPF i on u_1..u_Q, with LPFs flattened
/// output-major. The implied per-process coupling matrices A.col(q) *
/// A.col(q)^T are rank-one and PSD by construction.
struct LmcCoefficients {
  Eigen::MatrixXd A; // J x Q

  Eigen::Index num_latent() const { return A.cols(); }
  Eigen::Index num_lpf() const { return A.rows(); }
};

/// Identifies one latent parameter function: output d, parameter index j
/// within that output, and the flattened output-major position.
struct LpfIndex {
  int d = 0;    // output index, 0-based
  int j = 0;    // parameter function within the output, 0-based
  int flat = 0; // 0-based flattened index

  bool operator==(const LpfIndex&) const = default;
};

/// Flattened LPF indices for a likelihood list, output-major.
std::vector<LpfIndex> lpf_indices(const std::vector<LikelihoodPtr>& likelihoods);

/// Total latent parameter function count J = sum_d J_d.
int total_lpf_count(const std::vector<LikelihoodPtr>& likelihoods);

/// Cross-covariance block cov(f_i(X), f_i'(X')) = sum_q A(i,q) A(i',q) K_q(X, X').
Eigen::MatrixXd lpf_cross_cov(const LmcCoefficients& coeffs,
                              const std::vector<RbfKernel>& kernels, int i,
                              int i_prime, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Xp);

/// Cross-covariance between one LPF and all inducing variables stacked over
/// q: the n x (Q*M) matrix [A(i,1) K_1(X,Z), ..., A(i,Q) K_Q(X,Z)].
Eigen::MatrixXd lpf_inducing_cross_cov(const LmcCoefficients& coeffs,
                                       const std::vector<RbfKernel>& kernels,
                                       int i, const Eigen::MatrixXd& X,
                                       const Eigen::MatrixXd& Z);

/// Dense prior covariance of the stacked LPF vector, one input matrix per
/// LPF (block (i,i') = lpf_cross_cov(i, i')). Guarded to sampling scale:
/// throws ResourceError when the stacked size exceeds 10^4 rows.
Eigen::MatrixXd prior_full_cov(const LmcCoefficients& coeffs,
                               const std::vector<RbfKernel>& kernels,
                               const std::vector<Eigen::MatrixXd>& inputs);

/// Shared-input special case: sum_q (a_q a_q^T) kron K_q(X, X). Equals the
/// block assembly when every LPF uses the same inputs.
Eigen::MatrixXd prior_full_cov_shared(const LmcCoefficients& coeffs,
                                      const std::vector<RbfKernel>& kernels,
                                      const Eigen::MatrixXd& X);

/// A prior draw: the sampled dataset plus the latent parameter function
/// values that generated it (one N_d x J_d matrix per output).
struct PriorSample {
  HeterogeneousDataset data;
  std::vector<Eigen::MatrixXd> latents;
};

/// Draw f ~ N(0, K) by Cholesky of the jittered prior covariance, push each
/// LPF through its link and sample every output. `inputs` has one matrix per
/// output (the J_d LPFs of an output share its inputs). Jitter escalates
/// 1e-8 -> 1e-4 in decade steps before giving up with NumericalError.
PriorSample sample_heterogeneous(const LmcCoefficients& coeffs,
                                 const std::vector<RbfKernel>& kernels,
                                 const std::vector<LikelihoodPtr>& likelihoods,
                                 const std::vector<Eigen::MatrixXd>& inputs,
                                 Rng& rng);

} // namespace mogp

#endif
