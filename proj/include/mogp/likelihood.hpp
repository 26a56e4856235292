/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_LIKELIHOOD_HPP
#define MOGP_LIKELIHOOD_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "mogp/quadrature.hpp"
#include "mogp/rng.hpp"

namespace mogp {

/// Domain of an observed value, used to validate data files and samples
/// against the likelihood that owns the output.
enum class ValueKind { binary, count, real };

/// One output's observation model p(y | theta) where theta is produced by
/// latent_count() link-transformed latent parameter functions.
///
/// All methods are pure and thread-safe; instances are immutable. Adding a
/// new distribution means implementing exactly this interface: latent count,
/// log_pdf, variational expectation (analytic or via the quadrature
/// fallback), predictive moments and sampling.
class Likelihood {
public:
  virtual ~Likelihood() = default;

  /// Canonical lower-case name used in dataset manifests and model files.
  virtual const std::string& name() const = 0;

  /// Number of latent parameter functions feeding this likelihood.
  virtual int latent_count() const = 0;

  virtual ValueKind value_kind() const = 0;

  /// Whether y is a legal observation for this likelihood.
  bool valid_value(double y) const;

  /// Throws std::invalid_argument naming the offending value if invalid.
  void require_valid(double y) const;

  /// log p(y | f) with f the latent parameter vector (size latent_count()).
  virtual double log_pdf(double y, const Eigen::VectorXd& f) const = 0;

  /// sup_f log p(y | f); +inf when the supremum is unbounded. Used as a
  /// crude upper bound on expected log-likelihood terms.
  virtual double log_pdf_sup(double y) const = 0;

  /// E_{q(f_1)...q(f_J)}[log p(y | f)] under independent Gaussian marginals
  /// N(means[j], variances[j]).
  virtual double var_exp(double y, const Eigen::VectorXd& means,
                         const Eigen::VectorXd& variances,
                         const GhRule& rule) const = 0;

  /// Gradients of var_exp with respect to the marginal means and variances.
  /// Quadrature-based variants differentiate the fixed-node quadrature sum.
  virtual std::pair<Eigen::VectorXd, Eigen::VectorXd> var_exp_grad(
      double y, const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& rule) const = 0;

  /// Mean and variance of y* under int p(y*|f) q(f) df.
  virtual std::pair<double, double> predictive_moments(
      const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& rule) const = 0;

  /// log int p(y|f) q(f) df, computed with log-sum-exp over quadrature nodes.
  virtual double log_predictive_density(double y, const Eigen::VectorXd& means,
                                        const Eigen::VectorXd& variances,
                                        const GhRule& rule) const = 0;

  /// One draw from p(y | g(f)).
  virtual double sample(const Eigen::VectorXd& f, Rng& rng) const = 0;

protected:
  void check_inputs(double y, const Eigen::VectorXd& means,
                    const Eigen::VectorXd& variances) const;
  void check_moments(const Eigen::VectorXd& means,
                     const Eigen::VectorXd& variances) const;
  void check_latent(const Eigen::VectorXd& f) const;
};

using LikelihoodPtr = std::shared_ptr<const Likelihood>;

/// Binary observations through a logistic link: p(y=1|f) = sigma(f).
LikelihoodPtr make_bernoulli();

/// Count observations through an exponential link: y ~ Poisson(exp(f)).
LikelihoodPtr make_poisson();

/// Real observations with input-dependent noise:
/// y ~ N(f_1, exp(f_2)); links are (identity, exp).
LikelihoodPtr make_het_gaussian();

/// Factory by manifest name ("bernoulli", "poisson", "het_gaussian",
/// case-insensitive). Throws std::invalid_argument naming an unknown string.
LikelihoodPtr likelihood_from_name(const std::string& name);

/// Number of times the heteroscedastic Gaussian had to clamp the exponent of
/// exp(-mu2 + v2/2) into [-40, 40]; transient optimizer states can push it
/// out of range.
std::int64_t het_gaussian_clamp_count();
void reset_het_gaussian_clamp_count();

} // namespace mogp

#endif
