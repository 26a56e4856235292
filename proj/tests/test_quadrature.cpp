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
#include <random>

#include "mogp/quadrature.hpp"

using namespace mogp;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Moments of N(mean, var) by the recursion M_k = mean*M_{k-1} + (k-1)*var*M_{k-2}.
std::vector<double> gaussian_moments(double mean, double var, int up_to) {
  std::vector<double> m(up_to + 1);
  m[0] = 1.0;
  if (up_to >= 1) m[1] = mean;
  for (int k = 2; k <= up_to; ++k) {
    m[k] = mean * m[k - 1] + (k - 1) * var * m[k - 2];
  }
  return m;
}

} // namespace

TEST_CASE("order validation") {
  CHECK_THROWS_AS(gh_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(gh_rule(-3), std::invalid_argument);
  CHECK_THROWS_AS(gh_rule(201), std::invalid_argument);
  CHECK_NOTHROW(gh_rule(1));
  CHECK_NOTHROW(gh_rule(200));
}

TEST_CASE("order one is the midpoint rule") {
  const GhRule r = gh_rule(1);
  CHECK(r.nodes.size() == 1);
  CHECK(r.nodes[0] == 0.0);
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("weights are stored normalized and nodes are symmetric") {
  for (int order : {1, 2, 3, 4, 5, 7, 10, 20, 50, 111, 200}) {
    const GhRule r = gh_rule(order);
    CHECK(std::abs(r.weights.sum() - 1.0) < 1e-12);
    for (int i = 0; i < order; ++i) {
      CHECK(std::abs(r.nodes[i] + r.nodes[order - 1 - i]) < 1e-12);
      CHECK(r.weights[i] > 0.0);
    }
    // ascending
    for (int i = 1; i < order; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
}

TEST_CASE("low-order moments") {
  const GhRule r2 = gh_rule(2);
  CHECK(std::abs(expect_1d(r2, 0.0, 1.0, [](double x) { return x * x; }) -
                 1.0) < 1e-12);
  const GhRule r3 = gh_rule(3);
  CHECK(std::abs(expect_1d(r3, 0.0, 1.0,
                           [](double x) { return x * x * x * x; }) -
                 3.0) < 1e-12);
}

TEST_CASE("expect_1d basics") {
  const GhRule r = default_gh_rule();
  CHECK(std::abs(expect_1d(r, 1.7, 0.9, [](double x) { return x; }) - 1.7) <
        1e-12);
  CHECK(std::abs(expect_1d(r, -3.2, 2.5, [](double x) { return x; }) + 3.2) <
        1e-12);
  CHECK(std::abs(expect_1d(r, 0.0, 2.0, [](double x) { return x * x; }) -
                 2.0) < 1e-12);

  // zero variance evaluates the integrand at the mean, exactly
  int calls = 0;
  const double v = expect_1d(r, 0.37, 0.0, [&](double x) {
    ++calls;
    return std::sin(x);
  });
  CHECK(calls == 1);
  CHECK(v == std::sin(0.37));

  CHECK_THROWS_AS(expect_1d(r, std::nan(""), 1.0, [](double x) { return x; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(expect_1d(r, 0.0, -1.0, [](double x) { return x; }),
                  std::invalid_argument);
}

TEST_CASE("polynomial exactness up to degree 2n-1") {
  std::mt19937_64 eng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int order = 1; order <= 8; ++order) {
    const GhRule r = gh_rule(order);
    const int degree = 2 * order - 1;
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> coeff(degree + 1);
      for (auto& c : coeff) c = normal(eng);
      const double mean = normal(eng);
      const double var = unif(eng);
      const auto poly = [&](double x) {
        double acc = 0.0, xk = 1.0;
        for (int k = 0; k <= degree; ++k) {
          acc += coeff[k] * xk;
          xk *= x;
        }
        return acc;
      };
      const auto moments = gaussian_moments(mean, var, degree);
      double expected = 0.0;
      for (int k = 0; k <= degree; ++k) expected += coeff[k] * moments[k];
      const double got = expect_1d(r, mean, var, poly);
      CHECK(std::abs(got - expected) <
            1e-10 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("logistic log-likelihood against a Monte Carlo oracle") {
  const GhRule r = gh_rule(50);
  const double gh =
      expect_1d(r, 0.0, 1.0, [](double x) { return std::log(logistic(x)); });

  std::mt19937_64 eng(20240817);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 10'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = -std::log1p(std::exp(-normal(eng)));
    sum += v;
    sumsq += v * v;
  }
  const double mc = sum / n;
  const double se = std::sqrt((sumsq / n - mc * mc) / n);
  CHECK(std::abs(gh - mc) < 3.0 * se);
}

TEST_CASE("expect_2d") {
  const GhRule r = default_gh_rule();
  Eigen::Vector2d means(0.4, -1.2), vars(0.7, 1.3);
  CHECK(std::abs(expect_2d(r, means, vars,
                           [](double x, double y) { return x + y; }) -
                 (0.4 - 1.2)) < 1e-12);
  CHECK(std::abs(expect_2d(r, means, vars,
                           [](double x, double y) { return x * y; }) -
                 (0.4 * -1.2)) < 1e-12);

  // lognormal mean identity E[e^y] = e^{mu + v/2}
  const GhRule r10 = gh_rule(10);
  const double got = expect_2d(r10, Eigen::Vector2d(0.0, 0.0),
                               Eigen::Vector2d(1.0, 1.0),
                               [](double, double y) { return std::exp(y); });
  CHECK(std::abs(got - std::exp(0.5)) < 1e-9);

  // one degenerate dimension
  const double mixed =
      expect_2d(r, Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(0.0, 1.0),
                [](double x, double y) { return x * y * y; });
  CHECK(std::abs(mixed - 2.0) < 1e-12);

  CHECK_THROWS_AS(expect_2d(r, Eigen::Vector2d(0.0, 0.0),
                            Eigen::Vector2d(-1.0, 1.0),
                            [](double, double) { return 0.0; }),
                  std::invalid_argument);
}

// Convergence profile of the Bernoulli integrand. Tight Cauchy agreement
// holds for moderate variances; at variance 5 the integrand's strip of
// analyticity limits the rate and the measured 20-vs-40 gap is ~5e-6.
TEST_CASE("order 20 vs order 40 on the Bernoulli integrand") {
  const GhRule r20 = gh_rule(20);
  const GhRule r40 = gh_rule(40);
  double worst_tight = 0.0, worst_all = 0.0;
  for (double mean = -5.0; mean <= 5.0; mean += 0.5) {
    for (double var : {0.1, 0.5, 1.0, 1.5, 2.5, 3.5, 5.0}) {
      for (double y : {0.0, 1.0}) {
        const double s = 2.0 * y - 1.0;
        const auto f = [&](double x) { return std::log(logistic(s * x)); };
        const double d =
            std::abs(expect_1d(r20, mean, var, f) - expect_1d(r40, mean, var, f));
        if (var <= 1.5) worst_tight = std::max(worst_tight, d);
        worst_all = std::max(worst_all, d);
      }
    }
  }
  CHECK(worst_tight < 1e-8);
  CHECK(worst_all < 1e-5);
}
