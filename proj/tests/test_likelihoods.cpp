/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mogp/likelihood.hpp"
#include "mogp/quadrature.hpp"
#include "mogp/rng.hpp"

using namespace mogp;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Quadrature cross-check oracle: integrates log_pdf directly, independent of
// any closed form inside the likelihood.
double var_exp_by_quadrature(const Likelihood& lik, double y,
                             const Eigen::VectorXd& means,
                             const Eigen::VectorXd& vars, const GhRule& rule) {
  if (lik.latent_count() == 1) {
    return expect_1d(rule, means[0], vars[0],
                     [&](double f) { return lik.log_pdf(y, vec1(f)); });
  }
  return expect_2d(rule, means, vars, [&](double f1, double f2) {
    return lik.log_pdf(y, vec2(f1, f2));
  });
}

} // namespace

TEST_CASE("latent counts and factory") {
  CHECK(make_bernoulli()->latent_count() == 1);
  CHECK(make_poisson()->latent_count() == 1);
  CHECK(make_het_gaussian()->latent_count() == 2);
  CHECK(likelihood_from_name("Bernoulli")->name() == "bernoulli");
  CHECK(likelihood_from_name("POISSON")->name() == "poisson");
  CHECK(likelihood_from_name("Het_Gaussian")->name() == "het_gaussian");
  CHECK_THROWS_WITH_AS(likelihood_from_name("gamma"),
                       doctest::Contains("gamma"), std::invalid_argument);
}

TEST_CASE("observation validation") {
  const auto bern = make_bernoulli();
  CHECK(bern->valid_value(0.0));
  CHECK(bern->valid_value(1.0));
  CHECK_FALSE(bern->valid_value(2.0));
  CHECK_FALSE(bern->valid_value(0.5));
  CHECK_THROWS_AS(bern->log_pdf(2.0, vec1(0.0)), std::invalid_argument);

  const auto pois = make_poisson();
  CHECK(pois->valid_value(0.0));
  CHECK(pois->valid_value(7.0));
  CHECK_FALSE(pois->valid_value(-1.0));
  CHECK_FALSE(pois->valid_value(2.5));

  const auto het = make_het_gaussian();
  CHECK(het->valid_value(-3.7));
  CHECK_FALSE(het->valid_value(std::nan("")));
  CHECK_THROWS_AS(het->log_pdf(0.0, vec1(0.0)), std::invalid_argument);
}

TEST_CASE("log_pdf closed forms") {
  CHECK(make_bernoulli()->log_pdf(1.0, vec1(0.0)) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(make_poisson()->log_pdf(0.0, vec1(0.0)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(make_het_gaussian()->log_pdf(0.0, vec2(0.0, 0.0)) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

  // stable at extreme latents
  CHECK(std::isfinite(make_bernoulli()->log_pdf(1.0, vec1(-700.0))));
  CHECK(std::abs(make_bernoulli()->log_pdf(1.0, vec1(700.0))) < 1e-300);
}

TEST_CASE("var_exp degenerates to log_pdf at zero variance") {
  const GhRule& rule = default_gh_rule();
  Rng rng(4);
  const auto bern = make_bernoulli();
  const auto pois = make_poisson();
  const auto het = make_het_gaussian();
  for (int rep = 0; rep < 20; ++rep) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double mu2 = rng.uniform(-2.0, 2.0);
    CHECK(std::abs(bern->var_exp(1.0, vec1(mu), vec1(0.0), rule) -
                   bern->log_pdf(1.0, vec1(mu))) < 1e-12);
    CHECK(std::abs(pois->var_exp(3.0, vec1(mu), vec1(0.0), rule) -
                   pois->log_pdf(3.0, vec1(mu))) < 1e-12);
    CHECK(std::abs(het->var_exp(0.7, vec2(mu, mu2), vec2(0.0, 0.0), rule) -
                   het->log_pdf(0.7, vec2(mu, mu2))) < 1e-12);
  }
}

TEST_CASE("closed-form var_exp agrees with the quadrature oracle") {
  const GhRule r30 = gh_rule(30);
  const auto pois = make_poisson();
  const double expected = 2.0 - std::exp(1.25) - std::log(2.0);
  CHECK(pois->var_exp(2.0, vec1(1.0), vec1(0.5), r30) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(pois->var_exp(2.0, vec1(1.0), vec1(0.5), r30) -
                 var_exp_by_quadrature(*pois, 2.0, vec1(1.0), vec1(0.5), r30)) <
        1e-9);

  const auto het = make_het_gaussian();
  const double het_expected =
      -0.5 * std::log(2.0 * M_PI) - 0.0 - 0.5 * std::exp(0.5) * 2.0;
  CHECK(het->var_exp(1.0, vec2(0.0, 0.0), vec2(1.0, 1.0), r30) ==
        doctest::Approx(het_expected).epsilon(1e-12));
  CHECK(std::abs(het->var_exp(1.0, vec2(0.0, 0.0), vec2(1.0, 1.0), r30) -
                 var_exp_by_quadrature(*het, 1.0, vec2(0.0, 0.0),
                                       vec2(1.0, 1.0), r30)) < 1e-9);

  Rng rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const double y = static_cast<double>(rng.poisson(2.0));
    const Eigen::VectorXd mu = vec1(rng.uniform(-2.0, 2.0));
    const Eigen::VectorXd v = vec1(rng.uniform(0.0, 2.0));
    CHECK(std::abs(pois->var_exp(y, mu, v, r30) -
                   var_exp_by_quadrature(*pois, y, mu, v, r30)) < 1e-9);
    const double yr = rng.normal();
    const Eigen::VectorXd mu2 = vec2(rng.uniform(-2.0, 2.0), rng.uniform(-1.5, 1.5));
    const Eigen::VectorXd v2 = vec2(rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.5));
    CHECK(std::abs(het->var_exp(yr, mu2, v2, r30) -
                   var_exp_by_quadrature(*het, yr, mu2, v2, r30)) < 1e-9);
  }
}

TEST_CASE("var_exp gradients") {
  const GhRule& rule = default_gh_rule();
  const auto pois = make_poisson();

  // stationary point of the Poisson mean gradient
  const auto [gp, gvp] = pois->var_exp_grad(1.0, vec1(0.0), vec1(0.0), rule);
  CHECK(gp[0] == doctest::Approx(0.0).epsilon(1e-14));

  const auto het = make_het_gaussian();
  const auto [gh, gvh] = het->var_exp_grad(0.3, vec2(0.1, 0.0), vec2(0.2, 0.0), rule);
  CHECK(gvh[0] == doctest::Approx(-0.5).epsilon(1e-12));

  // finite differences on random draws, all variants
  std::vector<LikelihoodPtr> liks{make_bernoulli(), make_poisson(),
                                  make_het_gaussian()};
  Rng rng(6);
  const double step = 1e-5;
  for (const auto& lik : liks) {
    for (int rep = 0; rep < 100; ++rep) {
      const int jd = lik->latent_count();
      double y = 0.0;
      switch (lik->value_kind()) {
        case ValueKind::binary: y = rng.bernoulli(0.5) ? 1.0 : 0.0; break;
        case ValueKind::count: y = static_cast<double>(rng.poisson(2.0)); break;
        case ValueKind::real: y = rng.normal(); break;
      }
      Eigen::VectorXd mu(jd), v(jd);
      for (int j = 0; j < jd; ++j) {
        mu[j] = rng.uniform(-3.0, 3.0);
        v[j] = rng.uniform(0.05, 3.0);
      }
      const auto [gm, gv] = lik->var_exp_grad(y, mu, v, rule);
      for (int j = 0; j < jd; ++j) {
        Eigen::VectorXd mp = mu, mm = mu;
        mp[j] += step;
        mm[j] -= step;
        const double fdm = (lik->var_exp(y, mp, v, rule) -
                            lik->var_exp(y, mm, v, rule)) /
                           (2.0 * step);
        CHECK(std::abs(gm[j] - fdm) <
              std::max(1e-8, 1e-6 * std::abs(fdm)));
        Eigen::VectorXd vp = v, vm = v;
        vp[j] += step;
        vm[j] -= step;
        const double fdv = (lik->var_exp(y, mu, vp, rule) -
                            lik->var_exp(y, mu, vm, rule)) /
                           (2.0 * step);
        CHECK(std::abs(gv[j] - fdv) <
              std::max(1e-8, 1e-6 * std::abs(fdv)));
      }
    }
  }
}

TEST_CASE("predictive moments") {
  const GhRule& rule = default_gh_rule();
  const auto [bm, bv] =
      make_bernoulli()->predictive_moments(vec1(0.0), vec1(0.0), rule);
  CHECK(bm == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bv == doctest::Approx(0.25).epsilon(1e-12));

  const auto [pm, pv] =
      make_poisson()->predictive_moments(vec1(0.0), vec1(0.0), rule);
  CHECK(pm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pv == doctest::Approx(1.0).epsilon(1e-12));

  const auto [hm, hv] = make_het_gaussian()->predictive_moments(
      vec2(2.0, 0.0), vec2(0.3, 0.0), rule);
  CHECK(hm == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hv == doctest::Approx(1.3).epsilon(1e-12));

  // range properties on random inputs
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const double mu = rng.uniform(-4.0, 4.0);
    const double v = rng.uniform(0.0, 3.0);
    const auto [m1, v1] =
        make_bernoulli()->predictive_moments(vec1(mu), vec1(v), rule);
    CHECK(m1 > 0.0);
    CHECK(m1 < 1.0);
    const auto [m2, v2] =
        make_poisson()->predictive_moments(vec1(mu), vec1(v), rule);
    CHECK(m2 > 0.0);
    CHECK(v2 >= m2);
    const double mu2 = rng.uniform(-2.0, 2.0);
    const double vv2 = rng.uniform(0.0, 2.0);
    const auto [m3, v3] = make_het_gaussian()->predictive_moments(
        vec2(mu, mu2), vec2(v, vv2), rule);
    CHECK(v3 >= v);
  }
}

TEST_CASE("log predictive density") {
  const GhRule& rule = default_gh_rule();
  const auto bern = make_bernoulli();
  const auto pois = make_poisson();
  const auto het = make_het_gaussian();

  // zero variance reduces to log_pdf
  CHECK(std::abs(bern->log_predictive_density(1.0, vec1(0.4), vec1(0.0), rule) -
                 bern->log_pdf(1.0, vec1(0.4))) < 1e-12);
  CHECK(std::abs(het->log_predictive_density(0.2, vec2(0.1, -0.3),
                                             vec2(0.0, 0.0), rule) -
                 het->log_pdf(0.2, vec2(0.1, -0.3))) < 1e-12);

  // symmetry: E[sigma(f)] = 1/2 for a zero-mean Gaussian
  for (double v : {0.1, 1.0, 4.0}) {
    CHECK(std::abs(bern->log_predictive_density(1.0, vec1(0.0), vec1(v), rule) +
                   std::log(2.0)) < 1e-12);
  }

  // Monte Carlo oracle for the Poisson predictive density
  {
    Rng rng(20240818);
    const int n = 10'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = rng.normal(1.0, std::sqrt(0.4));
      const double p = std::exp(pois->log_pdf(3.0, vec1(f)));
      sum += p;
      sumsq += p * p;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    const double lpd =
        pois->log_predictive_density(3.0, vec1(1.0), vec1(0.4), gh_rule(40));
    // delta method: se(log m) ~= se(m)/m
    CHECK(std::abs(lpd - std::log(mean)) < 3.0 * se / mean);
  }

  // Jensen: log E >= E log
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double v = rng.uniform(0.0, 3.0);
    const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
    CHECK(bern->log_predictive_density(y, vec1(mu), vec1(v), rule) >=
          bern->var_exp(y, vec1(mu), vec1(v), rule) - 1e-9);
    const double yc = static_cast<double>(rng.poisson(2.0));
    CHECK(pois->log_predictive_density(yc, vec1(mu), vec1(v), rule) >=
          pois->var_exp(yc, vec1(mu), vec1(v), rule) - 1e-9);
    const double yr = rng.normal();
    const Eigen::VectorXd mu2 = vec2(mu, rng.uniform(-1.0, 1.0));
    const Eigen::VectorXd v2 = vec2(v, rng.uniform(0.0, 1.5));
    CHECK(het->log_predictive_density(yr, mu2, v2, rule) >=
          het->var_exp(yr, mu2, v2, rule) - 1e-9);
  }
}

TEST_CASE("var_exp never exceeds the log-likelihood supremum") {
  const GhRule& rule = default_gh_rule();
  std::vector<LikelihoodPtr> liks{make_bernoulli(), make_poisson(),
                                  make_het_gaussian()};
  Rng rng(10);
  for (const auto& lik : liks) {
    for (int rep = 0; rep < 100; ++rep) {
      const int jd = lik->latent_count();
      double y = 0.0;
      switch (lik->value_kind()) {
        case ValueKind::binary: y = rng.bernoulli(0.5) ? 1.0 : 0.0; break;
        case ValueKind::count: y = static_cast<double>(rng.poisson(3.0)); break;
        case ValueKind::real: y = rng.normal(); break;
      }
      Eigen::VectorXd mu(jd), v(jd);
      for (int j = 0; j < jd; ++j) {
        mu[j] = rng.uniform(-5.0, 5.0);
        v[j] = rng.uniform(0.0, 4.0);
      }
      CHECK(lik->var_exp(y, mu, v, rule) <= lik->log_pdf_sup(y) + 1e-9);
    }
  }
}

TEST_CASE("var_exp is concave in the mean for Bernoulli and Poisson") {
  const GhRule& rule = default_gh_rule();
  const double h = 1e-3;
  for (const auto& lik :
       std::vector<LikelihoodPtr>{make_bernoulli(), make_poisson()}) {
    const double y = lik->value_kind() == ValueKind::binary ? 1.0 : 2.0;
    for (double v : {0.0, 0.5, 2.0}) {
      for (double mu = -5.0; mu <= 5.0; mu += 0.25) {
        const double second =
            lik->var_exp(y, vec1(mu + h), vec1(v), rule) -
            2.0 * lik->var_exp(y, vec1(mu), vec1(v), rule) +
            lik->var_exp(y, vec1(mu - h), vec1(v), rule);
        CHECK(second <= 1e-9);
      }
    }
  }
}

TEST_CASE("heteroscedastic exponent clamp is counted") {
  reset_het_gaussian_clamp_count();
  const GhRule& rule = default_gh_rule();
  const auto het = make_het_gaussian();
  CHECK(std::isfinite(het->var_exp(0.0, vec2(0.0, -90.0), vec2(0.1, 0.1), rule)));
  CHECK(het_gaussian_clamp_count() == 1);
  het->var_exp(0.0, vec2(0.0, 90.0), vec2(0.1, 0.1), rule);
  CHECK(het_gaussian_clamp_count() == 2);
  reset_het_gaussian_clamp_count();
  CHECK(het_gaussian_clamp_count() == 0);
}

TEST_CASE("sampling") {
  Rng rng(11);
  const auto bern = make_bernoulli();
  for (int i = 0; i < 1000; ++i) {
    CHECK(bern->sample(vec1(50.0), rng) == 1.0);
  }

  const auto pois = make_poisson();
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += pois->sample(vec1(std::log(4.0)), rng);
  CHECK(sum / n == doctest::Approx(4.0).epsilon(0.025));

  const auto het = make_het_gaussian();
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = het->sample(vec2(0.0, 0.0), rng);
    s += y;
    s2 += y * y;
  }
  const double var = s2 / n - (s / n) * (s / n);
  CHECK(std::abs(var - 1.0) < 0.05);
}
