/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/likelihood.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mogp {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297; // log(2*pi)/2

std::atomic<std::int64_t> g_het_clamp_count{0};

double softplus(double x) {
  // log(1 + e^x) without overflow on either tail
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

} // namespace

std::int64_t het_gaussian_clamp_count() { return g_het_clamp_count.load(); }
void reset_het_gaussian_clamp_count() { g_het_clamp_count.store(0); }

bool Likelihood::valid_value(double y) const {
  if (!std::isfinite(y)) return false;
  switch (value_kind()) {
    case ValueKind::binary:
      return y == 0.0 || y == 1.0;
    case ValueKind::count:
      return y >= 0.0 && y == std::floor(y);
    case ValueKind::real:
      return true;
  }
  return false;
}

void Likelihood::require_valid(double y) const {
  if (!valid_value(y)) {
    throw std::invalid_argument(name() + ": invalid observation " +
                                std::to_string(y));
  }
}

void Likelihood::check_inputs(double y, const Eigen::VectorXd& means,
                              const Eigen::VectorXd& variances) const {
  require_valid(y);
  check_moments(means, variances);
}

void Likelihood::check_moments(const Eigen::VectorXd& means,
                               const Eigen::VectorXd& variances) const {
  if (means.size() != latent_count() || variances.size() != latent_count()) {
    throw std::invalid_argument(name() + ": expected " +
                                std::to_string(latent_count()) +
                                " latent moments");
  }
  for (Eigen::Index j = 0; j < means.size(); ++j) {
    if (!std::isfinite(means[j]) || !std::isfinite(variances[j]) ||
        variances[j] < 0.0) {
      throw std::invalid_argument(name() + ": invalid marginal moments");
    }
  }
}

void Likelihood::check_latent(const Eigen::VectorXd& f) const {
  if (f.size() != latent_count() || !f.allFinite()) {
    throw std::invalid_argument(name() + ": invalid latent vector");
  }
}

// ---------------------------------------------------------------------------
// Bernoulli, logistic link. The expected log-likelihood has no closed form;
// it goes through one-dimensional quadrature.
// ---------------------------------------------------------------------------

class BernoulliLikelihood final : public Likelihood {
public:
  const std::string& name() const override {
    static const std::string n = "bernoulli";
    return n;
  }
  int latent_count() const override { return 1; }
  ValueKind value_kind() const override { return ValueKind::binary; }

  double log_pdf(double y, const Eigen::VectorXd& f) const override {
    require_valid(y);
    check_latent(f);
    return log_lik(y, f[0]);
  }

  double log_pdf_sup(double) const override { return 0.0; }

  double var_exp(double y, const Eigen::VectorXd& means,
                 const Eigen::VectorXd& variances,
                 const GhRule& rule) const override {
    check_inputs(y, means, variances);
    return expect_1d(rule, means[0], variances[0],
                     [&](double f) { return log_lik(y, f); });
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> var_exp_grad(
      double y, const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& rule) const override {
    check_inputs(y, means, variances);
    const double s = 2.0 * y - 1.0;
    const double mu = means[0];
    const double v = variances[0];
    Eigen::VectorXd gm(1), gv(1);
    if (v == 0.0) {
      gm[0] = s * sigmoid(-s * mu);
      // limit of the quadrature-sum derivative as v -> 0
      gv[0] = -0.5 * sigmoid(mu) * sigmoid(-mu);
      return {gm, gv};
    }
    const double scale = std::sqrt(2.0 * v);
    double dm = 0.0, dv = 0.0;
    for (int k = 0; k < rule.order; ++k) {
      const double t = rule.nodes[k];
      const double f = mu + scale * t;
      const double d1 = s * sigmoid(-s * f); // d log_lik / d f
      dm += rule.weights[k] * d1;
      dv += rule.weights[k] * d1 * t / scale;
    }
    gm[0] = dm;
    gv[0] = dv;
    return {gm, gv};
  }

  std::pair<double, double> predictive_moments(
      const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& rule) const override {
    check_moments(means, variances);
    const double p = expect_1d(rule, means[0], variances[0],
                               [](double f) { return sigmoid(f); });
    return {p, p * (1.0 - p)};
  }

  double log_predictive_density(double y, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& variances,
                                const GhRule& rule) const override {
    check_inputs(y, means, variances);
    if (variances[0] == 0.0) return log_lik(y, means[0]);
    const double scale = std::sqrt(2.0 * variances[0]);
    std::vector<double> terms(rule.order);
    for (int k = 0; k < rule.order; ++k) {
      terms[k] = std::log(rule.weights[k]) +
                 log_lik(y, means[0] + scale * rule.nodes[k]);
    }
    return log_sum_exp(terms);
  }

  double sample(const Eigen::VectorXd& f, Rng& rng) const override {
    check_latent(f);
    return rng.bernoulli(sigmoid(f[0])) ? 1.0 : 0.0;
  }

private:
  static double log_lik(double y, double f) {
    const double s = 2.0 * y - 1.0;
    return -softplus(-s * f);
  }
};

// ---------------------------------------------------------------------------
// Poisson, exponential link. E[exp(f)] = exp(mu + v/2) under a Gaussian
// makes the expected log-likelihood analytic.
// ---------------------------------------------------------------------------

class PoissonLikelihood final : public Likelihood {
public:
  const std::string& name() const override {
    static const std::string n = "poisson";
    return n;
  }
  int latent_count() const override { return 1; }
  ValueKind value_kind() const override { return ValueKind::count; }

  double log_pdf(double y, const Eigen::VectorXd& f) const override {
    require_valid(y);
    check_latent(f);
    return y * f[0] - std::exp(f[0]) - std::lgamma(y + 1.0);
  }

  double log_pdf_sup(double y) const override {
    if (y == 0.0) return 0.0; // approached as the rate tends to zero
    return y * std::log(y) - y - std::lgamma(y + 1.0);
  }

  double var_exp(double y, const Eigen::VectorXd& means,
                 const Eigen::VectorXd& variances,
                 const GhRule& /*rule*/) const override {
    check_inputs(y, means, variances);
    return y * means[0] - std::exp(means[0] + 0.5 * variances[0]) -
           std::lgamma(y + 1.0);
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> var_exp_grad(
      double y, const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& /*rule*/) const override {
    check_inputs(y, means, variances);
    const double rate = std::exp(means[0] + 0.5 * variances[0]);
    Eigen::VectorXd gm(1), gv(1);
    gm[0] = y - rate;
    gv[0] = -0.5 * rate;
    return {gm, gv};
  }

  std::pair<double, double> predictive_moments(
      const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& /*rule*/) const override {
    check_moments(means, variances);
    const double mu = means[0], v = variances[0];
    const double mean = std::exp(mu + 0.5 * v);
    const double var = mean + std::expm1(v) * std::exp(2.0 * mu + v);
    return {mean, var};
  }

  double log_predictive_density(double y, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& variances,
                                const GhRule& rule) const override {
    check_inputs(y, means, variances);
    if (variances[0] == 0.0) {
      Eigen::VectorXd f(1);
      f[0] = means[0];
      return log_pdf(y, f);
    }
    const double scale = std::sqrt(2.0 * variances[0]);
    const double lg = std::lgamma(y + 1.0);
    std::vector<double> terms(rule.order);
    for (int k = 0; k < rule.order; ++k) {
      const double f = means[0] + scale * rule.nodes[k];
      terms[k] = std::log(rule.weights[k]) + y * f - std::exp(f) - lg;
    }
    return log_sum_exp(terms);
  }

  double sample(const Eigen::VectorXd& f, Rng& rng) const override {
    check_latent(f);
    // guard the sampler against absurd rates from extreme latents
    const double rate = std::exp(std::min(f[0], 30.0));
    return static_cast<double>(rng.poisson(rate));
  }
};

// ---------------------------------------------------------------------------
// Heteroscedastic Gaussian: latent mean and latent log-variance,
// links (identity, exp).
// ---------------------------------------------------------------------------

class HetGaussianLikelihood final : public Likelihood {
public:
  const std::string& name() const override {
    static const std::string n = "het_gaussian";
    return n;
  }
  int latent_count() const override { return 2; }
  ValueKind value_kind() const override { return ValueKind::real; }

  double log_pdf(double y, const Eigen::VectorXd& f) const override {
    require_valid(y);
    check_latent(f);
    const double r = y - f[0];
    return -kHalfLog2Pi - 0.5 * f[1] - 0.5 * std::exp(-f[1]) * r * r;
  }

  double log_pdf_sup(double) const override {
    return std::numeric_limits<double>::infinity();
  }

  double var_exp(double y, const Eigen::VectorXd& means,
                 const Eigen::VectorXd& variances,
                 const GhRule& /*rule*/) const override {
    check_inputs(y, means, variances);
    const double prec = precision_factor(means[1], variances[1]);
    const double r = y - means[0];
    return -kHalfLog2Pi - 0.5 * means[1] -
           0.5 * prec * (r * r + variances[0]);
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> var_exp_grad(
      double y, const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& /*rule*/) const override {
    check_inputs(y, means, variances);
    bool clamped = false;
    const double prec = precision_factor(means[1], variances[1], &clamped);
    const double r = y - means[0];
    const double quad = r * r + variances[0];
    Eigen::VectorXd gm(2), gv(2);
    gm[0] = prec * r;
    gv[0] = -0.5 * prec;
    // when clamped the precision factor is locally constant in (mu2, v2)
    gm[1] = -0.5 + (clamped ? 0.0 : 0.5 * prec * quad);
    gv[1] = clamped ? 0.0 : -0.25 * prec * quad;
    return {gm, gv};
  }

  std::pair<double, double> predictive_moments(
      const Eigen::VectorXd& means, const Eigen::VectorXd& variances,
      const GhRule& /*rule*/) const override {
    check_moments(means, variances);
    const double noise = std::exp(means[1] + 0.5 * variances[1]);
    return {means[0], variances[0] + noise};
  }

  double log_predictive_density(double y, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& variances,
                                const GhRule& rule) const override {
    check_inputs(y, means, variances);
    const auto point_lpdf = [&](double f1, double f2) {
      const double r = y - f1;
      return -kHalfLog2Pi - 0.5 * f2 - 0.5 * std::exp(-f2) * r * r;
    };
    const int n1 = variances[0] == 0.0 ? 1 : rule.order;
    const int n2 = variances[1] == 0.0 ? 1 : rule.order;
    const double s1 = std::sqrt(2.0 * variances[0]);
    const double s2 = std::sqrt(2.0 * variances[1]);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n1) * n2);
    for (int a = 0; a < n1; ++a) {
      const double f1 = means[0] + (n1 == 1 ? 0.0 : s1 * rule.nodes[a]);
      const double lw1 = n1 == 1 ? 0.0 : std::log(rule.weights[a]);
      for (int b = 0; b < n2; ++b) {
        const double f2 = means[1] + (n2 == 1 ? 0.0 : s2 * rule.nodes[b]);
        const double lw2 = n2 == 1 ? 0.0 : std::log(rule.weights[b]);
        terms.push_back(lw1 + lw2 + point_lpdf(f1, f2));
      }
    }
    return log_sum_exp(terms);
  }

  double sample(const Eigen::VectorXd& f, Rng& rng) const override {
    check_latent(f);
    return rng.normal(f[0], std::exp(0.5 * f[1]));
  }

private:
  // exp(-mu2 + v2/2) with the exponent clamped to [-40, 40]
  static double precision_factor(double mu2, double v2,
                                 bool* clamped = nullptr) {
    double e = -mu2 + 0.5 * v2;
    if (e < -40.0 || e > 40.0) {
      e = std::clamp(e, -40.0, 40.0);
      g_het_clamp_count.fetch_add(1, std::memory_order_relaxed);
      if (clamped) *clamped = true;
    }
    return std::exp(e);
  }
};

LikelihoodPtr make_bernoulli() {
  return std::make_shared<BernoulliLikelihood>();
}
LikelihoodPtr make_poisson() { return std::make_shared<PoissonLikelihood>(); }
LikelihoodPtr make_het_gaussian() {
  return std::make_shared<HetGaussianLikelihood>();
}

LikelihoodPtr likelihood_from_name(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "bernoulli") return make_bernoulli();
  if (lower == "poisson") return make_poisson();
  if (lower == "het_gaussian") return make_het_gaussian();
  throw std::invalid_argument("unknown likelihood \"" + name + "\"");
}

} // namespace mogp
