/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_DATASET_HPP
#define MOGP_DATASET_HPP

#include <Eigen/Core>
#include <vector>

namespace mogp {

/// Observations for one output: N rows of inputs and one value per row.
/// Values are stored as doubles; their domain (binary / count / real) is
/// validated against the owning likelihood at load or sampling time.
struct OutputData {
  Eigen::MatrixXd X; // N x p
  Eigen::VectorXd y; // N

  Eigen::Index size() const { return X.rows(); }
};

/// Per-output data with possibly unequal sample counts N_d. The output order
/// matches the model's likelihood list.
struct HeterogeneousDataset {
  std::vector<OutputData> outputs;

  Eigen::Index num_outputs() const {
    return static_cast<Eigen::Index>(outputs.size());
  }

  Eigen::Index total_size() const {
    Eigen::Index n = 0;
    for (const auto& o : outputs) n += o.size();
    return n;
  }

  Eigen::Index input_dim() const {
    for (const auto& o : outputs)
      if (o.X.size() > 0) return o.X.cols();
    return 0;
  }
};

} // namespace mogp

#endif
