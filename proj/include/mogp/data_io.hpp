/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_DATA_IO_HPP
#define MOGP_DATA_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mogp/dataset.hpp"
#include "mogp/inference.hpp"
#include "mogp/prior.hpp"

namespace mogp {

/// Manifest describing a heterogeneous dataset: an ordered output list and
/// the shared input dimension. Data paths are resolved relative to the
/// manifest's directory.
struct ManifestOutput {
  std::string name;
  std::string likelihood;
  std::string data_path;
};

struct DatasetManifest {
  int input_dim = 0;
  std::vector<ManifestOutput> outputs;

  std::vector<LikelihoodPtr> make_likelihoods() const;
};

/// Parse a JSON manifest and every referenced data file. Data files are
/// comma-separated text with a header row, columns x1..xp then y. Values are
/// validated against the declared likelihood; failures name file, line and
/// column. Throws IoError / std::invalid_argument.
std::pair<DatasetManifest, HeterogeneousDataset> load_dataset(
    const std::filesystem::path& manifest_path);

/// Write manifest + one data file per output into `dir`. Floating-point
/// values are written with round-trip precision; load(save(x)) == x exactly.
void save_dataset(const DatasetManifest& manifest,
                  const HeterogeneousDataset& data,
                  const std::filesystem::path& dir,
                  const std::string& manifest_name = "manifest.json");

/// Configuration of the synthetic missing-gap experiment: two outputs
/// (heteroscedastic Gaussian, Bernoulli) on [0,1], all binary points inside
/// the gap moved to the test set. Generator constants (kernels, mixing
/// matrix) are fixed documented defaults; the seed drives inputs, latent
/// draws and labels.
struct GapExperimentConfig {
  int n_real = 600;
  int n_binary = 500;
  double gap_lo = 0.7;
  double gap_hi = 0.9;
  int n_test = 150;     // expected gap size; regenerate if < n_test/2 fall inside
  int num_latent = 3;   // Q
  int max_retries = 20;
};

struct GapExperiment {
  DatasetManifest manifest; // output names + likelihoods (no paths until saved)
  HeterogeneousDataset train;
  HeterogeneousDataset test;              // real output empty, binary = gap points
  std::vector<Eigen::MatrixXd> latents;   // ground truth per output (train+test rows)
  std::vector<Eigen::MatrixXd> latent_inputs;
};

GapExperiment gap_experiment(const GapExperimentConfig& config, Rng& rng);

/// Write train/test manifests, data files and the ground-truth latent
/// sidecar files into `dir`.
void save_gap_experiment(const GapExperiment& exp,
                         const std::filesystem::path& dir);

/// Versioned JSON model serialization. Doubles survive the round trip
/// exactly (shortest round-trip decimal form). load(save(m)) == m
/// field-by-field; shape inconsistencies, missing fields and version
/// mismatches are rejected with named errors.
void save_model(const LmcModel& model, const std::filesystem::path& path);
LmcModel load_model(const std::filesystem::path& path);

} // namespace mogp

#endif
