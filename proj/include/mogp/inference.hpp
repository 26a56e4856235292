/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_INFERENCE_HPP
#define MOGP_INFERENCE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mogp/dataset.hpp"
#include "mogp/kernel.hpp"
#include "mogp/likelihood.hpp"
#include "mogp/prior.hpp"
#include "mogp/quadrature.hpp"
#include "mogp/rng.hpp"

namespace mogp {

/// Variational state over the inducing variables: shared inducing inputs Z
/// and one Gaussian q(u_q) = N(mu[q], S_q) per latent process.
///
/// S_q is parameterized by its Cholesky factor. `L_raw[q]` stores the factor
/// with an unconstrained diagonal: the effective factor has
/// L(i,i) = exp(L_raw(i,i)) and L(i,j) = L_raw(i,j) below the diagonal, so
/// S_q = L L^T is symmetric positive definite for any raw values.
struct InducingState {
  Eigen::MatrixXd Z;                  // M x p
  std::vector<Eigen::VectorXd> mu;    // Q vectors of length M
  std::vector<Eigen::MatrixXd> L_raw; // Q lower-triangular M x M

  Eigen::Index num_inducing() const { return Z.rows(); }
  Eigen::Index num_latent() const {
    return static_cast<Eigen::Index>(mu.size());
  }

  /// Effective Cholesky factor of S_q (diagonal exponentiated).
  Eigen::MatrixXd chol_factor(int q) const;

  /// S_q = L L^T.
  Eigen::MatrixXd covariance(int q) const;
};

/// The full model: likelihood list, mixing coefficients, Q kernels and the
/// inducing-variable state.
struct LmcModel {
  std::vector<LikelihoodPtr> likelihoods;
  LmcCoefficients coeffs;
  std::vector<RbfKernel> kernels;
  InducingState inducing;

  Eigen::Index num_outputs() const {
    return static_cast<Eigen::Index>(likelihoods.size());
  }
  Eigen::Index num_latent() const {
    return static_cast<Eigen::Index>(kernels.size());
  }
  Eigen::Index num_lpf() const { return coeffs.num_lpf(); }
  Eigen::Index input_dim() const { return inducing.Z.cols(); }

  std::vector<LpfIndex> lpfs() const { return lpf_indices(likelihoods); }

  /// Throws std::invalid_argument if shapes are inconsistent.
  void validate() const;
};

/// Marginal posterior Gaussians of the latent parameter functions of one
/// output at given inputs: column j holds q(f_{d,j}) moments per datum.
struct MarginalGaussians {
  Eigen::MatrixXd mean;     // N x J_d
  Eigen::MatrixXd variance; // N x J_d, clamped to >= 0
};

/// One evidence-lower-bound evaluation.
/// total = sum_d scale_factors[d] * data_terms[d] - sum_q kl_terms[q].
struct ElboReport {
  double total = 0.0;
  Eigen::VectorXd data_terms;    // per output
  Eigen::VectorXd kl_terms;      // per latent process, >= 0
  Eigen::VectorXd scale_factors; // per output; N_d / batch_d, 1 when unbatched
};

/// Optional per-output mini-batch: row indices into each output's data.
using Batch = std::vector<std::vector<Eigen::Index>>;

/// Relative jitter added to inducing Gram diagonals before factorization.
inline constexpr double kDefaultJitter = 1e-8;

/// Marginals q(f_i) of one LPF at arbitrary inputs (means and variances
/// only; the bound never needs off-diagonal covariances). Solves go through
/// per-process Cholesky factors; failures raise NumericalError naming q.
std::pair<Eigen::VectorXd, Eigen::VectorXd> q_f_marginals(
    const LmcModel& model, int lpf_flat_index, const Eigen::MatrixXd& X,
    double jitter = kDefaultJitter);

/// All marginals for one output at once (cheaper: the per-process solves are
/// shared across that output's LPFs).
MarginalGaussians output_marginals(const LmcModel& model, int output,
                                   const Eigen::MatrixXd& X,
                                   double jitter = kDefaultJitter);

/// KL(q(u_q) || p(u_q)) per latent process.
Eigen::VectorXd kl_inducing(const LmcModel& model,
                            double jitter = kDefaultJitter);

/// The variational lower bound. When `batch` is given, data terms are summed
/// over the selected rows only and rescaled by N_d/|batch_d|; an empty batch
/// for an output that has data is rejected.
ElboReport elbo(const LmcModel& model, const HeterogeneousDataset& data,
                const std::optional<Batch>& batch, const GhRule& rule,
                double jitter = kDefaultJitter);

/// Flat parameter packing, in order: mu (per q), lower-triangular L_raw rows
/// (per q), kernel log-hyperparameters (per q), coefficient matrix A
/// (row-major), inducing inputs Z (row-major). All coordinates are
/// unconstrained.
struct ParamLayout {
  int Q = 0, M = 0, J = 0, p = 0;
  std::vector<int> kernel_sizes; // hyperparameter count per kernel

  int mu_offset(int q) const;
  int chol_offset(int q) const;
  int kernel_offset(int q) const;
  int coeff_offset() const;
  int z_offset() const;
  int size() const;

  /// Index ranges for the variational (E-step) and hyperparameter (M-step)
  /// blocks. Z is part of the M block when include_z is true.
  std::vector<std::pair<int, int>> e_step_spans() const;
  std::vector<std::pair<int, int>> m_step_spans(bool include_z) const;
};

ParamLayout param_layout(const LmcModel& model);
Eigen::VectorXd pack_params(const LmcModel& model);
void unpack_params(LmcModel& model, const Eigen::VectorXd& theta);

/// ELBO and its gradient over the full packed parameter vector.
std::pair<ElboReport, Eigen::VectorXd> elbo_grad(
    const LmcModel& model, const HeterogeneousDataset& data,
    const std::optional<Batch>& batch, const GhRule& rule,
    double jitter = kDefaultJitter);

enum class OptimizerKind { full_batch, stochastic };

/// Everything the training loop needs made explicit. Defaults follow common
/// practice for this model family: ADADELTA constants (decay 0.9, epsilon
/// 1e-6) for the stochastic path and mini-batches of 500 per output.
struct TrainConfig {
  int em_cycles = 10;
  int e_steps = 40;  // max optimizer iterations per E phase
  int m_steps = 40;  // max optimizer iterations per M phase
  OptimizerKind optimizer = OptimizerKind::full_batch;
  int batch_size = 500;
  double adadelta_decay = 0.9;
  double adadelta_epsilon = 1e-6;
  double adadelta_step_rate = 1.0;
  int sv_steps_per_cycle = 50; // mini-batch steps per EM cycle (stochastic)
  int checkpoint_every = 25;   // full-batch re-evaluations (stochastic)
  int quad_order = kDefaultQuadOrder;
  double jitter = kDefaultJitter;
  double rel_tol = 1e-6; // relative ELBO change over rel_window evaluations
  int rel_window = 10;
  bool optimize_z = true;
  std::uint64_t seed = 0;
  std::string trace_path; // empty: no trace file
};

/// One trace row per accepted full-batch step (deterministic path) or per
/// checkpoint (stochastic path).
struct TraceEntry {
  int iteration = 0;
  ElboReport report;
  double wall_ms = 0.0;
};

struct FitResult {
  LmcModel model; // best full-batch ELBO state observed (earliest on ties)
  std::vector<TraceEntry> trace;
};

/// Variational EM: alternate E-steps over {mu_q, L_q} and M-steps over
/// {kernel hyperparameters, A, Z}. The full-batch path uses an L-BFGS
/// optimizer with monotone line search; the stochastic path takes one
/// ADADELTA step on the variational block and one on the hyperparameter
/// block per mini-batch. Throws NumericalError if the bound turns non-finite.
FitResult fit(const LmcModel& model, const HeterogeneousDataset& data,
              const TrainConfig& config);

/// Model construction with the library's standard initialization: Z is a
/// uniform subsample of the pooled inputs, q(u_q) starts at the prior
/// (mu = 0, S_q = K_q), lengthscales at half the per-dimension input standard
/// deviation, unit kernel variances, and coefficients drawn N(0, 1/Q).
LmcModel init_model(const std::vector<LikelihoodPtr>& likelihoods,
                    const HeterogeneousDataset& data, int num_latent,
                    int num_inducing, Rng& rng, bool shared_lengthscale = false,
                    double jitter = kDefaultJitter);

} // namespace mogp

#endif
