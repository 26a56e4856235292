/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_PREDICT_HPP
#define MOGP_PREDICT_HPP

#include <Eigen/Core>
#include <vector>

#include "mogp/dataset.hpp"
#include "mogp/inference.hpp"

namespace mogp {

/// Per-point predictive log densities are floored here so a single saturated
/// prediction cannot produce an infinite score.
inline constexpr double kLogDensityFloor = -50.0;

/// Predictive mean/variance per output and test point, plus per-point log
/// predictive densities when targets were supplied.
struct OutputPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd log_density; // empty when no targets were given
};

struct PredictionSet {
  std::vector<OutputPrediction> outputs;
};

/// Predictive moments of y* at per-output test inputs: q(f*) marginals from
/// the inducing posterior pushed through each likelihood.
PredictionSet predict(const LmcModel& model,
                      const std::vector<Eigen::MatrixXd>& X_star,
                      const GhRule& rule, double jitter = kDefaultJitter);

/// Negative log predictive density of a test set.
/// per_output[d] is the mean over that output's points (NaN when empty);
/// `global` pools all points across outputs. Throws std::invalid_argument
/// when the test set is entirely empty.
struct NlpdResult {
  double global = 0.0;
  Eigen::VectorXd per_output;
};

NlpdResult nlpd(const LmcModel& model, const HeterogeneousDataset& test,
                const GhRule& rule, double jitter = kDefaultJitter);

/// predict() with log densities filled from the test targets.
PredictionSet predict_with_density(const LmcModel& model,
                                   const HeterogeneousDataset& test,
                                   const GhRule& rule,
                                   double jitter = kDefaultJitter);

} // namespace mogp

#endif
