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
#include <filesystem>
#include <fstream>

#include "mogp/inference.hpp"
#include "test_util.hpp"

using namespace mogp;
using namespace mogp::testutil;

namespace {

HeterogeneousDataset sine_toy(int n, Rng& rng) {
  HeterogeneousDataset data;
  OutputData o;
  o.X.resize(n, 1);
  o.y.resize(n);
  for (int r = 0; r < n; ++r) {
    o.X(r, 0) = rng.uniform();
    o.y[r] = std::sin(2.0 * M_PI * o.X(r, 0)) + 0.05 * rng.normal();
  }
  data.outputs.push_back(std::move(o));
  return data;
}

} // namespace

TEST_CASE("model initialization") {
  Rng data_rng(31);
  const std::vector<LikelihoodPtr> liks{make_het_gaussian(), make_bernoulli()};
  HeterogeneousDataset data = random_dataset(liks, {40, 30}, 2, data_rng);

  Rng init_rng(0, "init");
  LmcModel model = init_model(liks, data, 3, 12, init_rng);
  CHECK(model.num_latent() == 3);
  CHECK(model.inducing.num_inducing() == 12);
  CHECK(model.num_lpf() == 3);

  // q(u) starts at the prior
  CHECK(kl_inducing(model).cwiseAbs().maxCoeff() < 1e-9);

  // inducing inputs are a subsample of the pooled data inputs
  for (int m = 0; m < 12; ++m) {
    bool found = false;
    for (const auto& o : data.outputs) {
      for (Eigen::Index r = 0; r < o.size() && !found; ++r) {
        found = (o.X.row(r) - model.inducing.Z.row(m)).cwiseAbs().maxCoeff() == 0.0;
      }
    }
    CHECK(found);
  }

  // lengthscales sit at half the per-dimension standard deviation
  Eigen::MatrixXd pooled(70, 2);
  pooled << data.outputs[0].X, data.outputs[1].X;
  for (int c = 0; c < 2; ++c) {
    const double sd = std::sqrt(
        (pooled.col(c).array() - pooled.col(c).mean()).square().mean());
    CHECK(model.kernels[0].lengthscales()[c] ==
          doctest::Approx(0.5 * sd).epsilon(1e-12));
  }

  // deterministic given the same stream
  Rng init_rng2(0, "init");
  LmcModel model2 = init_model(liks, data, 3, 12, init_rng2);
  CHECK((pack_params(model) - pack_params(model2)).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(init_model(liks, data, 3, 1000, init_rng),
                  std::invalid_argument);
}

TEST_CASE("zero-iteration fit returns the input model unchanged") {
  Rng rng(32);
  const std::vector<LikelihoodPtr> liks{make_poisson()};
  LmcModel model = random_model(liks, 2, 3, 1, rng);
  HeterogeneousDataset data = random_dataset(liks, {8}, 1, rng);
  TrainConfig config;
  config.em_cycles = 0;
  const FitResult res = fit(model, data, config);
  CHECK(res.trace.size() == 1);
  CHECK((pack_params(res.model) - pack_params(model)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("full-batch trace is monotone within line-search tolerance") {
  Rng rng(33);
  HeterogeneousDataset data = sine_toy(50, rng);
  const std::vector<LikelihoodPtr> liks{make_het_gaussian()};
  Rng init_rng(1, "init");
  LmcModel model = init_model(liks, data, 2, 10, init_rng);

  TrainConfig config;
  config.em_cycles = 3;
  config.e_steps = 15;
  config.m_steps = 15;
  const FitResult res = fit(model, data, config);
  REQUIRE(res.trace.size() > 3);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].report.total >= res.trace[i - 1].report.total - 1e-7);
  }
  CHECK(res.trace.back().report.total > res.trace.front().report.total);

  // the returned model carries the best observed bound
  const ElboReport final_rep =
      elbo(res.model, data, std::nullopt, gh_rule(config.quad_order));
  CHECK(final_rep.total ==
        doctest::Approx(res.trace.back().report.total).epsilon(1e-9));
}

TEST_CASE("stochastic fit is reproducible and improves the bound") {
  Rng rng(34);
  const std::vector<LikelihoodPtr> liks{make_het_gaussian(), make_bernoulli()};
  HeterogeneousDataset data = random_dataset(liks, {60, 50}, 1, rng);
  Rng init_rng(2, "init");
  LmcModel model = init_model(liks, data, 2, 8, init_rng);

  TrainConfig config;
  config.optimizer = OptimizerKind::stochastic;
  config.em_cycles = 4;
  config.sv_steps_per_cycle = 25;
  config.batch_size = 20;
  config.checkpoint_every = 25;
  config.adadelta_step_rate = 1.0;
  config.seed = 7;

  const FitResult a = fit(model, data, config);
  const FitResult b = fit(model, data, config);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].iteration == b.trace[i].iteration);
    CHECK(a.trace[i].report.total == b.trace[i].report.total);
  }
  CHECK((pack_params(a.model) - pack_params(b.model)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(a.trace.back().report.total > a.trace.front().report.total);
}

TEST_CASE("trace file") {
  Rng rng(35);
  const std::vector<LikelihoodPtr> liks{make_poisson()};
  HeterogeneousDataset data = random_dataset(liks, {20}, 1, rng);
  Rng init_rng(3, "init");
  LmcModel model = init_model(liks, data, 1, 5, init_rng);

  const auto path = std::filesystem::temp_directory_path() / "mogp_trace.csv";
  TrainConfig config;
  config.em_cycles = 1;
  config.e_steps = 5;
  config.m_steps = 5;
  config.trace_path = path.string();
  const FitResult res = fit(model, data, config);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,total,data_0,kl_0,wall_ms");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == static_cast<int>(res.trace.size()));
  std::filesystem::remove(path);
}
