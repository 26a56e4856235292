/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mogp/errors.hpp"

namespace mogp {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// --- CSV ---------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const std::string& file, int line,
                    int column) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw IoError(file + ":" + std::to_string(line) + ": column " +
                  std::to_string(column) + ": cannot parse \"" + s +
                  "\" as a number");
  }
  return v;
}

OutputData read_data_file(const std::filesystem::path& path, int input_dim,
                          const Likelihood& lik) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path.string());
  const std::string fname = path.filename().string();

  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(fname + ": missing header row");
  }
  const auto header = split_csv_line(line);
  if (static_cast<int>(header.size()) != input_dim + 1) {
    throw IoError(fname + ":1: expected " + std::to_string(input_dim + 1) +
                  " columns (x1..x" + std::to_string(input_dim) +
                  ",y), found " + std::to_string(header.size()));
  }

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != input_dim + 1) {
      throw IoError(fname + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(input_dim + 1) + " fields, found " +
                    std::to_string(fields.size()));
    }
    Eigen::VectorXd x(input_dim);
    for (int c = 0; c < input_dim; ++c) {
      x[c] = parse_double(fields[c], fname, lineno, c + 1);
      if (!std::isfinite(x[c])) {
        throw IoError(fname + ":" + std::to_string(lineno) + ": column " +
                      std::to_string(c + 1) + ": non-finite input");
      }
    }
    const double y = parse_double(fields[input_dim], fname, lineno,
                                  input_dim + 1);
    if (!lik.valid_value(y)) {
      throw IoError(fname + ":" + std::to_string(lineno) + ": value " +
                    fields[input_dim] + " is not a valid " + lik.name() +
                    " observation");
    }
    xs.push_back(std::move(x));
    ys.push_back(y);
  }

  OutputData out;
  out.X.resize(static_cast<Eigen::Index>(xs.size()), input_dim);
  out.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    out.X.row(static_cast<Eigen::Index>(r)) = xs[r].transpose();
    out.y[static_cast<Eigen::Index>(r)] = ys[r];
  }
  return out;
}

void write_data_file(const std::filesystem::path& path, const OutputData& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const int p = static_cast<int>(data.X.cols());
  for (int c = 0; c < p; ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (int c = 0; c < p; ++c) out << fmt_double(data.X(r, c)) << ',';
    out << fmt_double(data.y[r]) << '\n';
  }
}

// --- JSON helpers --------------------------------------------------------

const json& require_field(const json& j, const char* field,
                          const std::string& context) {
  const auto it = j.find(field);
  if (it == j.end()) {
    throw IoError(context + ": missing field \"" + field + "\"");
  }
  return *it;
}

json load_json(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Eigen::VectorXd to_vector(const json& j, const std::string& context) {
  if (!j.is_array()) throw IoError(context + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw IoError(context + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd to_matrix(const json& j, const std::string& context) {
  if (!j.is_array()) throw IoError(context + ": expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = to_vector(j[r], context);
    if (r == 0) {
      m.resize(rows, row.size());
    } else if (row.size() != m.cols()) {
      throw IoError(context + ": ragged rows");
    }
    m.row(r) = row.transpose();
  }
  if (rows == 0) m.resize(0, 0);
  return m;
}

json from_vector(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json from_matrix(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    j.push_back(from_vector(m.row(r).transpose()));
  }
  return j;
}

} // namespace

// --- manifest + dataset ----------------------------------------------------

std::vector<LikelihoodPtr> DatasetManifest::make_likelihoods() const {
  std::vector<LikelihoodPtr> liks;
  for (const auto& o : outputs) liks.push_back(likelihood_from_name(o.likelihood));
  return liks;
}

std::pair<DatasetManifest, HeterogeneousDataset> load_dataset(
    const std::filesystem::path& manifest_path) {
  const json j = load_json(manifest_path, "manifest");
  const std::string ctx = manifest_path.filename().string();

  DatasetManifest manifest;
  manifest.input_dim = require_field(j, "input_dim", ctx).get<int>();
  if (manifest.input_dim < 1) {
    throw IoError(ctx + ": input_dim must be positive");
  }
  const json& outs = require_field(j, "outputs", ctx);
  if (!outs.is_array() || outs.empty()) {
    throw IoError(ctx + ": outputs must be a non-empty array");
  }

  HeterogeneousDataset data;
  const auto dir = manifest_path.parent_path();
  for (const auto& o : outs) {
    ManifestOutput mo;
    mo.name = require_field(o, "name", ctx).get<std::string>();
    mo.likelihood = require_field(o, "likelihood", ctx).get<std::string>();
    mo.data_path = require_field(o, "data_path", ctx).get<std::string>();
    const LikelihoodPtr lik = likelihood_from_name(mo.likelihood);
    data.outputs.push_back(
        read_data_file(dir / mo.data_path, manifest.input_dim, *lik));
    manifest.outputs.push_back(std::move(mo));
  }
  return {std::move(manifest), std::move(data)};
}

void save_dataset(const DatasetManifest& manifest,
                  const HeterogeneousDataset& data,
                  const std::filesystem::path& dir,
                  const std::string& manifest_name) {
  if (manifest.outputs.size() != data.outputs.size()) {
    throw std::invalid_argument("save_dataset: manifest/data output mismatch");
  }
  std::filesystem::create_directories(dir);
  json j;
  j["input_dim"] = manifest.input_dim;
  j["outputs"] = json::array();
  for (std::size_t d = 0; d < manifest.outputs.size(); ++d) {
    ManifestOutput o = manifest.outputs[d];
    if (o.data_path.empty()) o.data_path = o.name + ".csv";
    write_data_file(dir / o.data_path, data.outputs[d]);
    j["outputs"].push_back({{"name", o.name},
                            {"likelihood", o.likelihood},
                            {"data_path", o.data_path}});
  }
  std::ofstream out(dir / manifest_name);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

// --- gap experiment ----------------------------------------------------

namespace {

// Fixed generator constants for the synthetic two-output experiment. The
// binary output loads on the same latent processes as the real output's mean
// function, so information can flow across the gap, and its amplitude is
// large enough that gap labels are usually far from coin flips; the
// log-noise function has a small amplitude (noise variance around one).
Eigen::MatrixXd gap_coefficients(int Q) {
  // The binary output leans on the shortest-lengthscale process, so its gap
  // region cannot be extrapolated from the binary observations alone, while
  // the real output (observed across the whole range) shares those processes.
  Eigen::MatrixXd base(3, 3);
  base << 1.2, 0.7, 0.35,   // real output: mean
      0.05, -0.4, 0.25,     // real output: log variance
      2.3, 1.4, 0.6;        // binary output
  Eigen::MatrixXd A(3, Q);
  for (int q = 0; q < Q; ++q) {
    A.col(q) = base.col(q % 3) * std::pow(0.5, q / 3);
  }
  return A;
}

std::vector<RbfKernel> gap_kernels(int Q) {
  std::vector<RbfKernel> kernels;
  for (int q = 0; q < Q; ++q) {
    const double ell = Q == 1 ? 0.15 : 0.06 + 0.21 * q / (Q - 1.0);
    kernels.emplace_back(1.0, ell);
  }
  return kernels;
}

Eigen::MatrixXd sorted_uniform(int n, Rng& rng) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.uniform();
  std::sort(xs.begin(), xs.end());
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = xs[i];
  return X;
}

} // namespace

GapExperiment gap_experiment(const GapExperimentConfig& config, Rng& rng) {
  if (config.n_real < 1 || config.n_binary < 1 || config.num_latent < 1 ||
      !(config.gap_lo < config.gap_hi)) {
    throw std::invalid_argument("gap_experiment: invalid configuration");
  }
  const std::vector<LikelihoodPtr> likelihoods{make_het_gaussian(),
                                               make_bernoulli()};
  const LmcCoefficients coeffs{gap_coefficients(config.num_latent)};
  const auto kernels = gap_kernels(config.num_latent);

  Eigen::MatrixXd x_real, x_bin;
  int in_gap = 0;
  int attempt = 0;
  while (true) {
    ++attempt;
    x_real = sorted_uniform(config.n_real, rng);
    x_bin = sorted_uniform(config.n_binary, rng);
    in_gap = 0;
    for (Eigen::Index i = 0; i < x_bin.rows(); ++i) {
      if (x_bin(i, 0) >= config.gap_lo && x_bin(i, 0) <= config.gap_hi) {
        ++in_gap;
      }
    }
    if (in_gap * 2 >= config.n_test) break;
    if (attempt >= config.max_retries) {
      throw std::runtime_error(
          "gap_experiment: only " + std::to_string(in_gap) +
          " binary points fell inside the gap after " +
          std::to_string(attempt) + " attempts (need >= " +
          std::to_string(config.n_test / 2) + ")");
    }
  }

  const PriorSample sample =
      sample_heterogeneous(coeffs, kernels, likelihoods, {x_real, x_bin}, rng);

  GapExperiment exp;
  exp.manifest.input_dim = 1;
  exp.manifest.outputs = {{"real", "het_gaussian", "real.csv"},
                          {"binary", "bernoulli", "binary.csv"}};
  exp.latents = sample.latents;
  exp.latent_inputs = {x_real, x_bin};

  // Real output is fully observed; binary points inside the gap are test.
  exp.train.outputs.resize(2);
  exp.test.outputs.resize(2);
  exp.train.outputs[0] = sample.data.outputs[0];
  exp.test.outputs[0].X.resize(0, 1);
  exp.test.outputs[0].y.resize(0);

  const auto& bin = sample.data.outputs[1];
  OutputData train_bin, test_bin;
  train_bin.X.resize(bin.size() - in_gap, 1);
  train_bin.y.resize(bin.size() - in_gap);
  test_bin.X.resize(in_gap, 1);
  test_bin.y.resize(in_gap);
  Eigen::Index tr = 0, te = 0;
  for (Eigen::Index i = 0; i < bin.size(); ++i) {
    const bool gap =
        bin.X(i, 0) >= config.gap_lo && bin.X(i, 0) <= config.gap_hi;
    if (gap) {
      test_bin.X.row(te) = bin.X.row(i);
      test_bin.y[te++] = bin.y[i];
    } else {
      train_bin.X.row(tr) = bin.X.row(i);
      train_bin.y[tr++] = bin.y[i];
    }
  }
  exp.train.outputs[1] = std::move(train_bin);
  exp.test.outputs[1] = std::move(test_bin);
  return exp;
}

void save_gap_experiment(const GapExperiment& exp,
                         const std::filesystem::path& dir) {
  save_dataset(exp.manifest, exp.train, dir / "train");
  save_dataset(exp.manifest, exp.test, dir / "test");
  for (std::size_t d = 0; d < exp.latents.size(); ++d) {
    const auto& name = exp.manifest.outputs[d].name;
    std::ofstream out(dir / ("latents_" + name + ".csv"));
    if (!out) throw IoError("cannot write latent sidecar in " + dir.string());
    const int p = static_cast<int>(exp.latent_inputs[d].cols());
    const int jd = static_cast<int>(exp.latents[d].cols());
    for (int c = 0; c < p; ++c) out << 'x' << (c + 1) << ',';
    for (int j = 0; j < jd; ++j) out << 'f' << (j + 1) << (j + 1 < jd ? "," : "");
    out << '\n';
    for (Eigen::Index r = 0; r < exp.latent_inputs[d].rows(); ++r) {
      for (int c = 0; c < p; ++c)
        out << fmt_double(exp.latent_inputs[d](r, c)) << ',';
      for (int j = 0; j < jd; ++j) {
        out << fmt_double(exp.latents[d](r, j)) << (j + 1 < jd ? "," : "");
      }
      out << '\n';
    }
  }
}

// --- model serialization -------------------------------------------------

void save_model(const LmcModel& model, const std::filesystem::path& path) {
  model.validate();
  json j;
  j["format_version"] = kModelFormatVersion;
  j["model_kind"] = "lmc";
  j["input_dim"] = model.input_dim();
  j["likelihoods"] = json::array();
  for (const auto& lik : model.likelihoods) j["likelihoods"].push_back(lik->name());
  j["coefficients"] = from_matrix(model.coeffs.A);
  j["kernels"] = json::array();
  for (const auto& k : model.kernels) {
    j["kernels"].push_back({{"variance", k.variance()},
                            {"lengthscales", from_vector(k.lengthscales())}});
  }
  json inducing;
  inducing["Z"] = from_matrix(model.inducing.Z);
  inducing["posterior"] = json::array();
  for (Eigen::Index q = 0; q < model.num_latent(); ++q) {
    json block;
    block["mu"] = from_vector(model.inducing.mu[q]);
    // packed lower triangle, row-major, diagonal on the log scale
    const auto& L = model.inducing.L_raw[q];
    json tri = json::array();
    for (Eigen::Index r = 0; r < L.rows(); ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) tri.push_back(L(r, c));
    }
    block["chol"] = std::move(tri);
    inducing["posterior"].push_back(std::move(block));
  }
  j["inducing"] = std::move(inducing);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << j.dump(2) << '\n';
}

LmcModel load_model(const std::filesystem::path& path) {
  const json j = load_json(path, "model file");
  const std::string ctx = path.filename().string();

  const int version = require_field(j, "format_version", ctx).get<int>();
  if (version != kModelFormatVersion) {
    throw IoError(ctx + ": unsupported format version " +
                  std::to_string(version) + " (expected " +
                  std::to_string(kModelFormatVersion) + ")");
  }
  const std::string kind =
      require_field(j, "model_kind", ctx).get<std::string>();
  if (kind != "lmc") {
    throw IoError(ctx + ": unexpected model kind \"" + kind + "\"");
  }

  LmcModel model;
  for (const auto& name : require_field(j, "likelihoods", ctx)) {
    model.likelihoods.push_back(likelihood_from_name(name.get<std::string>()));
  }
  model.coeffs.A = to_matrix(require_field(j, "coefficients", ctx),
                             ctx + ": coefficients");
  const int J = total_lpf_count(model.likelihoods);
  if (model.coeffs.A.rows() != J) {
    throw IoError(ctx + ": coefficient rows (" +
                  std::to_string(model.coeffs.A.rows()) +
                  ") do not match the likelihood list (J = " +
                  std::to_string(J) + ")");
  }

  for (const auto& k : require_field(j, "kernels", ctx)) {
    const double variance = require_field(k, "variance", ctx).get<double>();
    const Eigen::VectorXd ell =
        to_vector(require_field(k, "lengthscales", ctx), ctx + ": lengthscales");
    model.kernels.emplace_back(variance, ell);
  }

  const json& inducing = require_field(j, "inducing", ctx);
  model.inducing.Z = to_matrix(require_field(inducing, "Z", ctx), ctx + ": Z");
  const int input_dim = require_field(j, "input_dim", ctx).get<int>();
  if (model.inducing.Z.cols() != input_dim) {
    throw IoError(ctx + ": Z has " + std::to_string(model.inducing.Z.cols()) +
                  " columns but input_dim is " + std::to_string(input_dim));
  }
  const Eigen::Index M = model.inducing.Z.rows();
  const json& posterior = require_field(inducing, "posterior", ctx);
  if (posterior.size() != model.kernels.size()) {
    throw IoError(ctx + ": posterior block count does not match kernel count");
  }
  for (const auto& block : posterior) {
    model.inducing.mu.push_back(
        to_vector(require_field(block, "mu", ctx), ctx + ": mu"));
    const Eigen::VectorXd tri =
        to_vector(require_field(block, "chol", ctx), ctx + ": chol");
    if (tri.size() != M * (M + 1) / 2) {
      throw IoError(ctx + ": chol block has " + std::to_string(tri.size()) +
                    " entries, expected " + std::to_string(M * (M + 1) / 2));
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M, M);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < M; ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) L(r, c) = tri[k++];
    }
    model.inducing.L_raw.push_back(std::move(L));
  }

  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(ctx + ": " + e.what());
  }
  return model;
}

} // namespace mogp
