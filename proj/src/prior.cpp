/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/prior.hpp"

#include <stdexcept>
#include <string>

#include "linalg.hpp"
#include "mogp/errors.hpp"

namespace mogp {

namespace {

constexpr Eigen::Index kSamplingSizeGuard = 10000;

void check_lpf_range(const LmcCoefficients& coeffs, int i) {
  if (i < 0 || i >= coeffs.num_lpf()) {
    throw std::invalid_argument("LPF index " + std::to_string(i) +
                                " out of range [0, " +
                                std::to_string(coeffs.num_lpf()) + ")");
  }
}

void check_shapes(const LmcCoefficients& coeffs,
                  const std::vector<RbfKernel>& kernels) {
  if (coeffs.num_latent() != static_cast<Eigen::Index>(kernels.size())) {
    throw std::invalid_argument(
        "coefficient columns (" + std::to_string(coeffs.num_latent()) +
        ") do not match kernel count (" + std::to_string(kernels.size()) + ")");
  }
}

} // namespace

std::vector<LpfIndex> lpf_indices(const std::vector<LikelihoodPtr>& likelihoods) {
  std::vector<LpfIndex> out;
  int flat = 0;
  for (int d = 0; d < static_cast<int>(likelihoods.size()); ++d) {
    for (int j = 0; j < likelihoods[d]->latent_count(); ++j) {
      out.push_back({d, j, flat++});
    }
  }
  return out;
}

int total_lpf_count(const std::vector<LikelihoodPtr>& likelihoods) {
  int j = 0;
  for (const auto& lik : likelihoods) j += lik->latent_count();
  return j;
}

Eigen::MatrixXd lpf_cross_cov(const LmcCoefficients& coeffs,
                              const std::vector<RbfKernel>& kernels, int i,
                              int i_prime, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Xp) {
  check_shapes(coeffs, kernels);
  check_lpf_range(coeffs, i);
  check_lpf_range(coeffs, i_prime);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), Xp.rows());
  for (Eigen::Index q = 0; q < coeffs.num_latent(); ++q) {
    const double b = coeffs.A(i, q) * coeffs.A(i_prime, q);
    if (b == 0.0) continue;
    out.noalias() += b * kernels[q].gram(X, Xp);
  }
  return out;
}

Eigen::MatrixXd lpf_inducing_cross_cov(const LmcCoefficients& coeffs,
                                       const std::vector<RbfKernel>& kernels,
                                       int i, const Eigen::MatrixXd& X,
                                       const Eigen::MatrixXd& Z) {
  check_shapes(coeffs, kernels);
  check_lpf_range(coeffs, i);
  const Eigen::Index Q = coeffs.num_latent();
  const Eigen::Index M = Z.rows();
  Eigen::MatrixXd out(X.rows(), Q * M);
  for (Eigen::Index q = 0; q < Q; ++q) {
    const double a = coeffs.A(i, q);
    if (a == 0.0) {
      out.middleCols(q * M, M).setZero();
    } else {
      out.middleCols(q * M, M) = a * kernels[q].gram(X, Z);
    }
  }
  return out;
}

Eigen::MatrixXd prior_full_cov(const LmcCoefficients& coeffs,
                               const std::vector<RbfKernel>& kernels,
                               const std::vector<Eigen::MatrixXd>& inputs) {
  check_shapes(coeffs, kernels);
  const int J = static_cast<int>(coeffs.num_lpf());
  if (static_cast<int>(inputs.size()) != J) {
    throw std::invalid_argument("prior_full_cov: need one input matrix per LPF");
  }
  Eigen::Index total = 0;
  std::vector<Eigen::Index> offsets(J);
  for (int i = 0; i < J; ++i) {
    offsets[i] = total;
    total += inputs[i].rows();
  }
  if (total > kSamplingSizeGuard) {
    throw ResourceError("prior_full_cov: stacked size " +
                        std::to_string(total) + " exceeds guard " +
                        std::to_string(kSamplingSizeGuard));
  }

  Eigen::MatrixXd K(total, total);
  for (int i = 0; i < J; ++i) {
    for (int ip = i; ip < J; ++ip) {
      const Eigen::MatrixXd block =
          lpf_cross_cov(coeffs, kernels, i, ip, inputs[i], inputs[ip]);
      K.block(offsets[i], offsets[ip], block.rows(), block.cols()) = block;
      if (ip != i) {
        K.block(offsets[ip], offsets[i], block.cols(), block.rows()) =
            block.transpose();
      }
    }
  }
  return K;
}

Eigen::MatrixXd prior_full_cov_shared(const LmcCoefficients& coeffs,
                                      const std::vector<RbfKernel>& kernels,
                                      const Eigen::MatrixXd& X) {
  check_shapes(coeffs, kernels);
  const Eigen::Index J = coeffs.num_lpf();
  const Eigen::Index N = X.rows();
  if (J * N > kSamplingSizeGuard) {
    throw ResourceError("prior_full_cov_shared: stacked size " +
                        std::to_string(J * N) + " exceeds guard " +
                        std::to_string(kSamplingSizeGuard));
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(J * N, J * N);
  for (Eigen::Index q = 0; q < coeffs.num_latent(); ++q) {
    const Eigen::MatrixXd Kq = kernels[q].gram(X, X);
    const Eigen::VectorXd a = coeffs.A.col(q);
    for (Eigen::Index i = 0; i < J; ++i) {
      for (Eigen::Index ip = 0; ip < J; ++ip) {
        const double b = a[i] * a[ip];
        if (b == 0.0) continue;
        K.block(i * N, ip * N, N, N) += b * Kq;
      }
    }
  }
  return K;
}

PriorSample sample_heterogeneous(const LmcCoefficients& coeffs,
                                 const std::vector<RbfKernel>& kernels,
                                 const std::vector<LikelihoodPtr>& likelihoods,
                                 const std::vector<Eigen::MatrixXd>& inputs,
                                 Rng& rng) {
  check_shapes(coeffs, kernels);
  if (inputs.size() != likelihoods.size()) {
    throw std::invalid_argument(
        "sample_heterogeneous: need one input matrix per output");
  }
  const auto lpfs = lpf_indices(likelihoods);
  if (static_cast<Eigen::Index>(lpfs.size()) != coeffs.num_lpf()) {
    throw std::invalid_argument(
        "sample_heterogeneous: coefficient rows do not match the likelihood list");
  }

  // One input matrix per LPF; the LPFs of an output share its inputs.
  std::vector<Eigen::MatrixXd> lpf_inputs;
  lpf_inputs.reserve(lpfs.size());
  bool shared = true;
  for (const auto& idx : lpfs) {
    lpf_inputs.push_back(inputs[idx.d]);
    shared = shared && inputs[idx.d].rows() == inputs[0].rows() &&
             inputs[idx.d].isApprox(inputs[0]);
  }

  const Eigen::MatrixXd K =
      shared ? prior_full_cov_shared(coeffs, kernels, inputs[0])
             : prior_full_cov(coeffs, kernels, lpf_inputs);

  // The prior draw consumes one normal per latent value regardless of the
  // covariance, so datasets stay seed-comparable across coefficient choices.
  Eigen::VectorXd z(K.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  Eigen::VectorXd f;
  if (K.diagonal().maxCoeff() == 0.0) {
    f = Eigen::VectorXd::Zero(K.rows()); // degenerate prior (zero loadings)
  } else {
    const auto chol = detail::chol_with_jitter(K, 1e-8, "prior covariance");
    f = chol.llt.matrixL() * z;
  }

  PriorSample sample;
  sample.data.outputs.resize(likelihoods.size());
  sample.latents.resize(likelihoods.size());

  Eigen::Index offset = 0;
  std::vector<Eigen::Index> lpf_offsets(lpfs.size());
  for (std::size_t i = 0; i < lpfs.size(); ++i) {
    lpf_offsets[i] = offset;
    offset += lpf_inputs[i].rows();
  }

  for (std::size_t d = 0; d < likelihoods.size(); ++d) {
    const Eigen::Index n = inputs[d].rows();
    const int jd = likelihoods[d]->latent_count();
    Eigen::MatrixXd latents(n, jd);
    for (const auto& idx : lpfs) {
      if (idx.d != static_cast<int>(d)) continue;
      latents.col(idx.j) = f.segment(lpf_offsets[idx.flat], n);
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      y[r] = likelihoods[d]->sample(latents.row(r).transpose(), rng);
    }
    sample.data.outputs[d] = {inputs[d], std::move(y)};
    sample.latents[d] = std::move(latents);
  }
  return sample;
}

} // namespace mogp
