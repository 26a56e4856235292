/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mogp/predict.hpp"
#include "test_util.hpp"

using namespace mogp;
using namespace mogp::testutil;

namespace {

// Marginals q(f) pinned (numerically) to a point mass at (c1, c2): a single
// inducing point, a near-constant kernel and a collapsed posterior
// covariance.
LmcModel degenerate_het_model(double c1, double c2) {
  LmcModel model;
  model.likelihoods = {make_het_gaussian()};
  model.coeffs.A = Eigen::MatrixXd::Identity(2, 2);
  model.kernels.emplace_back(1.0, 1e6);
  model.kernels.emplace_back(1.0, 1e6);
  model.inducing.Z = Eigen::MatrixXd::Constant(1, 1, 0.5);
  model.inducing.mu = {Eigen::VectorXd::Constant(1, c1),
                       Eigen::VectorXd::Constant(1, c2)};
  model.inducing.L_raw = {Eigen::MatrixXd::Constant(1, 1, -40.0),
                          Eigen::MatrixXd::Constant(1, 1, -40.0)};
  return model;
}

} // namespace

TEST_CASE("zero-coefficient model predicts a fair coin") {
  LmcModel model;
  model.likelihoods = {make_bernoulli()};
  model.coeffs.A = Eigen::MatrixXd::Zero(1, 1);
  model.kernels.emplace_back(1.0, 0.5);
  model.inducing.Z = Eigen::MatrixXd::Constant(1, 1, 0.0);
  model.inducing.mu = {Eigen::VectorXd::Zero(1)};
  model.inducing.L_raw = {Eigen::MatrixXd::Zero(1, 1)};

  Eigen::MatrixXd X(11, 1);
  for (int r = 0; r < 11; ++r) X(r, 0) = -1.0 + 0.2 * r;
  const PredictionSet set = predict(model, {X}, default_gh_rule());
  for (int r = 0; r < 11; ++r) {
    CHECK(set.outputs[0].mean[r] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(set.outputs[0].variance[r] == doctest::Approx(0.25).epsilon(1e-12));
  }

  // and its NLPD is log 2 per point
  HeterogeneousDataset test;
  test.outputs.resize(1);
  test.outputs[0].X = X;
  test.outputs[0].y = Eigen::VectorXd::Ones(11);
  const NlpdResult res = nlpd(model, test, default_gh_rule());
  CHECK(res.global == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(res.per_output[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("near-noiseless fit recovers the training targets") {
  Rng rng(51);
  HeterogeneousDataset data;
  OutputData o;
  const int n = 40;
  o.X.resize(n, 1);
  o.y.resize(n);
  for (int r = 0; r < n; ++r) {
    o.X(r, 0) = (r + 0.5) / n;
    o.y[r] = std::sin(2.0 * M_PI * o.X(r, 0)) + 0.02 * rng.normal();
  }
  data.outputs.push_back(o);

  const std::vector<LikelihoodPtr> liks{make_het_gaussian()};
  Rng init_rng(4, "init");
  LmcModel model = init_model(liks, data, 2, 20, init_rng);
  TrainConfig config;
  config.em_cycles = 6;
  config.e_steps = 30;
  config.m_steps = 30;
  const FitResult res = fit(model, data, config);

  const PredictionSet pred = predict(res.model, {o.X}, default_gh_rule());
  int covered = 0;
  for (int r = 0; r < n; ++r) {
    const double sd = std::sqrt(pred.outputs[0].variance[r]);
    if (std::abs(pred.outputs[0].mean[r] - o.y[r]) <= 3.0 * sd) ++covered;
  }
  CHECK(covered >= static_cast<int>(0.95 * n));
}

TEST_CASE("prediction is deterministic") {
  Rng rng(52);
  const std::vector<LikelihoodPtr> liks{make_bernoulli(), make_poisson()};
  const LmcModel model = random_model(liks, 2, 4, 1, rng);
  Eigen::MatrixXd X(9, 1);
  for (int r = 0; r < 9; ++r) X(r, 0) = rng.uniform(-1.0, 1.0);
  const PredictionSet a = predict(model, {X, X}, default_gh_rule());
  const PredictionSet b = predict(model, {X, X}, default_gh_rule());
  for (int d = 0; d < 2; ++d) {
    CHECK((a.outputs[d].mean.array() == b.outputs[d].mean.array()).all());
    CHECK((a.outputs[d].variance.array() == b.outputs[d].variance.array()).all());
  }
}

TEST_CASE("prediction ranges") {
  Rng rng(53);
  const std::vector<LikelihoodPtr> liks{make_bernoulli(), make_poisson(),
                                        make_het_gaussian()};
  for (int rep = 0; rep < 5; ++rep) {
    const LmcModel model = random_model(liks, 2, 4, 1, rng);
    Eigen::MatrixXd X(7, 1);
    for (int r = 0; r < 7; ++r) X(r, 0) = rng.uniform(-1.0, 1.0);
    const PredictionSet set = predict(model, {X, X, X}, default_gh_rule());
    CHECK(set.outputs[0].mean.minCoeff() >= 0.0);
    CHECK(set.outputs[0].mean.maxCoeff() <= 1.0);
    CHECK(set.outputs[1].mean.minCoeff() > 0.0);
    for (int d = 0; d < 3; ++d) {
      CHECK(set.outputs[d].variance.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("nlpd bookkeeping") {
  Rng rng(54);
  const std::vector<LikelihoodPtr> liks{make_bernoulli(), make_het_gaussian()};
  const LmcModel model = random_model(liks, 2, 4, 1, rng);
  HeterogeneousDataset test = random_dataset(liks, {6, 5}, 1, rng);
  const GhRule& rule = default_gh_rule();
  const NlpdResult base = nlpd(model, test, rule);

  // invariant to test point ordering, exactly
  HeterogeneousDataset shuffled = test;
  std::vector<Eigen::Index> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  for (int r = 0; r < 6; ++r) {
    shuffled.outputs[0].X.row(r) = test.outputs[0].X.row(perm[r]);
    shuffled.outputs[0].y[r] = test.outputs[0].y[perm[r]];
  }
  const NlpdResult reordered = nlpd(model, shuffled, rule);
  CHECK(reordered.global == base.global);
  CHECK(reordered.per_output[0] == base.per_output[0]);

  // duplicating a test point moves the pooled sum by its log density
  HeterogeneousDataset dup = test;
  dup.outputs[1].X.conservativeResize(6, 1);
  dup.outputs[1].y.conservativeResize(6);
  dup.outputs[1].X.row(5) = test.outputs[1].X.row(1);
  dup.outputs[1].y[5] = test.outputs[1].y[1];
  const NlpdResult plus = nlpd(model, dup, rule);
  const PredictionSet dens = predict_with_density(model, test, rule);
  const double lpd = dens.outputs[1].log_density[1];
  CHECK(plus.global * 12.0 ==
        doctest::Approx(base.global * 11.0 - lpd).epsilon(1e-12));

  // empty test set is rejected; empty single outputs are reported as NaN
  HeterogeneousDataset empty;
  empty.outputs.resize(2);
  empty.outputs[0].X.resize(0, 1);
  empty.outputs[0].y.resize(0);
  empty.outputs[1].X.resize(0, 1);
  empty.outputs[1].y.resize(0);
  CHECK_THROWS_AS(nlpd(model, empty, rule), std::invalid_argument);

  HeterogeneousDataset partial = test;
  partial.outputs[0].X.resize(0, 1);
  partial.outputs[0].y.resize(0);
  const NlpdResult part = nlpd(model, partial, rule);
  CHECK(std::isnan(part.per_output[0]));
  CHECK(part.per_output[1] == base.per_output[1]);
}

TEST_CASE("saturated binary predictions are floored, not infinite") {
  LmcModel model = degenerate_het_model(0.0, 0.0);
  model.likelihoods = {make_bernoulli()};
  model.coeffs.A = Eigen::MatrixXd::Constant(1, 2, 0.0);
  model.coeffs.A(0, 0) = 60.0; // latent mean ~ +60: sigma(f) saturates
  model.inducing.mu[0][0] = 1.0;

  HeterogeneousDataset test;
  test.outputs.resize(1);
  test.outputs[0].X = Eigen::MatrixXd::Constant(1, 1, 0.5);
  test.outputs[0].y = Eigen::VectorXd::Zero(1); // the impossible class
  const NlpdResult res = nlpd(model, test, default_gh_rule());
  CHECK(res.global == 50.0);
  CHECK(res.global >= 0.0);
}

TEST_CASE("degenerate posterior reproduces the generator's entropy") {
  const double c1 = 0.7, c2 = -0.5;
  const LmcModel model = degenerate_het_model(c1, c2);

  Rng rng(55);
  const int n = 100000;
  HeterogeneousDataset test;
  test.outputs.resize(1);
  test.outputs[0].X.resize(n, 1);
  test.outputs[0].y.resize(n);
  const double sd = std::exp(0.5 * c2);
  for (int r = 0; r < n; ++r) {
    test.outputs[0].X(r, 0) = rng.uniform();
    test.outputs[0].y[r] = rng.normal(c1, sd);
  }
  const NlpdResult res = nlpd(model, test, default_gh_rule());
  const double entropy = 0.5 * std::log(2.0 * M_PI * M_E) + 0.5 * c2;
  // the NLPD of the true generator concentrates on its differential entropy
  const double se = std::sqrt(0.5 / n);
  CHECK(std::abs(res.global - entropy) < 5.0 * se);
}
