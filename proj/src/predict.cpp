/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mogp {

namespace {

// Summation over a canonical (sorted) order, so the reduction depends only on
// the multiset of values and never on test-point ordering.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

OutputPrediction predict_output(const LmcModel& model, int d,
                                const Eigen::MatrixXd& X, const GhRule& rule,
                                double jitter, const Eigen::VectorXd* targets) {
  OutputPrediction out;
  const Eigen::Index n = X.rows();
  out.mean.resize(n);
  out.variance.resize(n);
  if (targets) out.log_density.resize(n);
  if (n == 0) return out;

  const MarginalGaussians marg = output_marginals(model, d, X, jitter);
  const auto& lik = *model.likelihoods[d];
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd mu = marg.mean.row(r).transpose();
    const Eigen::VectorXd v = marg.variance.row(r).transpose();
    const auto [m, var] = lik.predictive_moments(mu, v, rule);
    out.mean[r] = m;
    out.variance[r] = var;
    if (targets) {
      const double lpd = lik.log_predictive_density((*targets)[r], mu, v, rule);
      out.log_density[r] = std::max(lpd, kLogDensityFloor);
    }
  }
  return out;
}

} // namespace

PredictionSet predict(const LmcModel& model,
                      const std::vector<Eigen::MatrixXd>& X_star,
                      const GhRule& rule, double jitter) {
  model.validate();
  if (static_cast<Eigen::Index>(X_star.size()) != model.num_outputs()) {
    throw std::invalid_argument("predict: need one test input matrix per output");
  }
  PredictionSet set;
  for (Eigen::Index d = 0; d < model.num_outputs(); ++d) {
    set.outputs.push_back(predict_output(model, static_cast<int>(d), X_star[d],
                                         rule, jitter, nullptr));
  }
  return set;
}

PredictionSet predict_with_density(const LmcModel& model,
                                   const HeterogeneousDataset& test,
                                   const GhRule& rule, double jitter) {
  model.validate();
  if (test.num_outputs() != model.num_outputs()) {
    throw std::invalid_argument("predict: test set output count mismatch");
  }
  PredictionSet set;
  for (Eigen::Index d = 0; d < model.num_outputs(); ++d) {
    set.outputs.push_back(predict_output(model, static_cast<int>(d),
                                         test.outputs[d].X, rule, jitter,
                                         &test.outputs[d].y));
  }
  return set;
}

NlpdResult nlpd(const LmcModel& model, const HeterogeneousDataset& test,
                const GhRule& rule, double jitter) {
  if (test.total_size() == 0) {
    throw std::invalid_argument("nlpd: empty test set");
  }
  const PredictionSet set = predict_with_density(model, test, rule, jitter);
  NlpdResult res;
  res.per_output.resize(model.num_outputs());
  std::vector<double> all;
  all.reserve(test.total_size());
  for (Eigen::Index d = 0; d < model.num_outputs(); ++d) {
    const auto& ld = set.outputs[d].log_density;
    if (ld.size() == 0) {
      res.per_output[d] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::vector<double> vals(ld.data(), ld.data() + ld.size());
    res.per_output[d] = -sorted_sum(vals) / static_cast<double>(ld.size());
    all.insert(all.end(), vals.begin(), vals.end());
  }
  const double count = static_cast<double>(all.size());
  res.global = -sorted_sum(std::move(all)) / count;
  return res;
}

} // namespace mogp
