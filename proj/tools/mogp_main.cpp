/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mogp/data_io.hpp"
#include "mogp/errors.hpp"
#include "mogp/inference.hpp"
#include "mogp/predict.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mogp;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void write_json(const json& j, const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

// ---------------------------------------------------------------------------
// Either one joint model or one single-output model per output.
// ---------------------------------------------------------------------------

struct ModelSet {
  std::vector<LmcModel> models; // size 1 (joint) or D (independent)
  bool independent = false;

  Eigen::Index num_outputs() const {
    return independent ? static_cast<Eigen::Index>(models.size())
                       : models.front().num_outputs();
  }

  const Likelihood& likelihood(int d) const {
    return independent ? *models[d].likelihoods[0]
                       : *models.front().likelihoods[d];
  }
};

ModelSet load_model_set(const fs::path& path) {
  std::ifstream probe(path);
  if (!probe) throw IoError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(probe);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  ModelSet set;
  if (j.value("model_kind", "") == "independent_set") {
    set.independent = true;
    if (!j.contains("models")) {
      throw IoError(path.string() + ": missing field \"models\"");
    }
    for (const auto& entry : j["models"]) {
      const fs::path rel = entry.at("path").get<std::string>();
      set.models.push_back(load_model(path.parent_path() / rel));
      if (set.models.back().num_outputs() != 1) {
        throw IoError(path.string() + ": independent entries must be "
                                      "single-output models");
      }
    }
    if (set.models.empty()) {
      throw IoError(path.string() + ": empty independent model set");
    }
  } else {
    set.models.push_back(load_model(path));
  }
  return set;
}

void check_compatible(const ModelSet& set, const DatasetManifest& manifest) {
  if (set.num_outputs() != static_cast<Eigen::Index>(manifest.outputs.size())) {
    throw std::invalid_argument(
        "model has " + std::to_string(set.num_outputs()) +
        " outputs but the manifest lists " +
        std::to_string(manifest.outputs.size()));
  }
  for (std::size_t d = 0; d < manifest.outputs.size(); ++d) {
    const auto canonical =
        likelihood_from_name(manifest.outputs[d].likelihood)->name();
    if (set.likelihood(static_cast<int>(d)).name() != canonical) {
      throw std::invalid_argument(
          "likelihood mismatch for output \"" + manifest.outputs[d].name +
          "\": model has " + set.likelihood(static_cast<int>(d)).name() +
          ", manifest says " + canonical);
    }
  }
}

HeterogeneousDataset slice_output(const HeterogeneousDataset& data, int d) {
  HeterogeneousDataset out;
  out.outputs.push_back(data.outputs[d]);
  return out;
}

PredictionSet set_predict_with_density(const ModelSet& set,
                                       const HeterogeneousDataset& test,
                                       const GhRule& rule) {
  if (!set.independent) {
    return predict_with_density(set.models.front(), test, rule);
  }
  PredictionSet all;
  for (std::size_t d = 0; d < set.models.size(); ++d) {
    PredictionSet one = predict_with_density(
        set.models[d], slice_output(test, static_cast<int>(d)), rule);
    all.outputs.push_back(std::move(one.outputs.front()));
  }
  return all;
}

NlpdResult set_nlpd(const ModelSet& set, const HeterogeneousDataset& test,
                    const GhRule& rule) {
  if (!set.independent) return nlpd(set.models.front(), test, rule);
  if (test.total_size() == 0) {
    throw std::invalid_argument("nlpd: empty test set");
  }
  NlpdResult res;
  res.per_output.resize(set.num_outputs());
  double pooled = 0.0;
  double count = 0.0;
  for (Eigen::Index d = 0; d < set.num_outputs(); ++d) {
    const HeterogeneousDataset one = slice_output(test, static_cast<int>(d));
    if (one.total_size() == 0) {
      res.per_output[d] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const NlpdResult r = nlpd(set.models[d], one, rule);
    res.per_output[d] = r.global;
    pooled += r.global * static_cast<double>(one.total_size());
    count += static_cast<double>(one.total_size());
  }
  res.global = pooled / count;
  return res;
}

double set_elbo(const ModelSet& set, const HeterogeneousDataset& data,
                const GhRule& rule) {
  if (!set.independent) {
    return elbo(set.models.front(), data, std::nullopt, rule).total;
  }
  double total = 0.0;
  for (std::size_t d = 0; d < set.models.size(); ++d) {
    total += elbo(set.models[d], slice_output(data, static_cast<int>(d)),
                  std::nullopt, rule)
                 .total;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Shared option blocks
// ---------------------------------------------------------------------------

struct TrainFlags {
  int q = 3;
  int m = 100;
  int max_iters = 10;
  int e_steps = 40;
  int m_steps = 40;
  int batch_size = 500;
  std::string optimizer = "full_batch";
  int quad_order = kDefaultQuadOrder;
  bool shared_lengthscale = false;
  bool no_optimize_z = false;
  bool independent = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--q", q, "number of latent processes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--m", m, "number of inducing points")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters,
                    "EM cycles (rounds of E and M phases)");
    cmd->add_option("--e-steps", e_steps, "optimizer iterations per E phase");
    cmd->add_option("--m-steps", m_steps, "optimizer iterations per M phase");
    cmd->add_option("--batch-size", batch_size,
                    "mini-batch size per output (stochastic optimizer)");
    cmd->add_option("--optimizer", optimizer, "full_batch or stochastic")
        ->check(CLI::IsMember({"full_batch", "stochastic"}));
    cmd->add_option("--quad-order", quad_order, "Gauss-Hermite order")
        ->check(CLI::Range(1, kMaxQuadOrder));
    cmd->add_flag("--shared-lengthscale", shared_lengthscale,
                  "one lengthscale shared across input dimensions");
    cmd->add_flag("--no-optimize-z", no_optimize_z,
                  "keep inducing inputs fixed during M steps");
    cmd->add_flag("--independent", independent,
                  "fit one single-output model per output");
  }

  TrainConfig to_config(std::uint64_t seed) const {
    TrainConfig config;
    config.em_cycles = max_iters;
    config.e_steps = e_steps;
    config.m_steps = m_steps;
    config.optimizer = optimizer == "stochastic" ? OptimizerKind::stochastic
                                                 : OptimizerKind::full_batch;
    config.batch_size = batch_size;
    config.quad_order = quad_order;
    config.optimize_z = !no_optimize_z;
    config.seed = seed;
    return config;
  }

  json to_json() const {
    return {{"q", q},
            {"m", m},
            {"max_iters", max_iters},
            {"e_steps", e_steps},
            {"m_steps", m_steps},
            {"batch_size", batch_size},
            {"optimizer", optimizer},
            {"quad_order", quad_order},
            {"shared_lengthscale", shared_lengthscale},
            {"optimize_z", !no_optimize_z},
            {"independent", independent}};
  }
};

bool parse_pair(const std::string& text, double& lo, double& hi) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  try {
    lo = std::stod(text.substr(0, colon));
    hi = std::stod(text.substr(colon + 1));
  } catch (...) {
    return false;
  }
  return true;
}

bool parse_grid(const std::string& text, double& lo, double& hi, int& count) {
  const auto c1 = text.find(':');
  const auto c2 = text.rfind(':');
  if (c1 == std::string::npos || c2 == c1) return false;
  try {
    lo = std::stod(text.substr(0, c1));
    hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    count = std::stoi(text.substr(c2 + 1));
  } catch (...) {
    return false;
  }
  return count >= 1;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int run_generate(const std::string& experiment, std::uint64_t seed,
                 const fs::path& out, int n1, int n2, const std::string& gap,
                 int q) {
  if (experiment != "gap") {
    throw std::invalid_argument("unknown experiment \"" + experiment + "\"");
  }
  GapExperimentConfig config;
  config.n_real = n1;
  config.n_binary = n2;
  config.num_latent = q;
  if (!parse_pair(gap, config.gap_lo, config.gap_hi) ||
      !(config.gap_lo < config.gap_hi)) {
    throw std::invalid_argument("cannot parse gap interval \"" + gap + "\"");
  }

  Rng rng(seed, "data");
  const GapExperiment exp = gap_experiment(config, rng);
  save_gap_experiment(exp, out);

  write_json({{"command", "generate"},
              {"experiment", experiment},
              {"seed", seed},
              {"n1", n1},
              {"n2", n2},
              {"gap", {config.gap_lo, config.gap_hi}},
              {"q", q},
              {"train_binary", exp.train.outputs[1].size()},
              {"test_binary", exp.test.outputs[1].size()}},
             out / "run_metadata.json");
  return 0;
}

struct FitArtifacts {
  fs::path model_path;
  double elbo_initial = 0.0;
  double elbo_final = 0.0;
};

FitArtifacts fit_and_save(const DatasetManifest& manifest,
                          const HeterogeneousDataset& data,
                          const TrainFlags& flags, std::uint64_t seed,
                          const fs::path& out) {
  fs::create_directories(out);
  FitArtifacts artifacts;
  if (!flags.independent) {
    Rng init_rng(seed, "init");
    LmcModel model = init_model(manifest.make_likelihoods(), data, flags.q,
                                flags.m, init_rng, flags.shared_lengthscale);
    TrainConfig config = flags.to_config(seed);
    config.trace_path = (out / "trace.csv").string();
    const FitResult res = fit(model, data, config);
    artifacts.model_path = out / "model.json";
    save_model(res.model, artifacts.model_path);
    artifacts.elbo_initial = res.trace.front().report.total;
    artifacts.elbo_final = res.trace.back().report.total;
    return artifacts;
  }

  json index;
  index["format_version"] = 1;
  index["model_kind"] = "independent_set";
  index["models"] = json::array();
  double initial = 0.0, final_total = 0.0;
  for (std::size_t d = 0; d < manifest.outputs.size(); ++d) {
    const auto& name = manifest.outputs[d].name;
    const HeterogeneousDataset one = slice_output(data, static_cast<int>(d));
    Rng init_rng(seed, "init:" + name);
    LmcModel model = init_model({likelihood_from_name(
                                    manifest.outputs[d].likelihood)},
                                one, flags.q, flags.m, init_rng,
                                flags.shared_lengthscale);
    TrainConfig config = flags.to_config(seed);
    config.trace_path = (out / ("trace_" + name + ".csv")).string();
    const FitResult res = fit(model, one, config);
    const std::string file = "model_" + std::to_string(d) + "_" + name + ".json";
    save_model(res.model, out / file);
    index["models"].push_back({{"name", name},
                               {"likelihood", manifest.outputs[d].likelihood},
                               {"path", file}});
    initial += res.trace.front().report.total;
    final_total += res.trace.back().report.total;
  }
  artifacts.model_path = out / "independent_models.json";
  write_json(index, artifacts.model_path);
  artifacts.elbo_initial = initial;
  artifacts.elbo_final = final_total;
  return artifacts;
}

int run_fit(const fs::path& manifest_path, const TrainFlags& flags,
            std::uint64_t seed, const fs::path& out) {
  const auto start = Clock::now();
  const auto [manifest, data] = load_dataset(manifest_path);
  const FitArtifacts artifacts = fit_and_save(manifest, data, flags, seed, out);

  json meta = flags.to_json();
  meta["command"] = "fit";
  meta["seed"] = seed;
  meta["manifest"] = manifest_path.string();
  meta["model_path"] = artifacts.model_path.filename().string();
  meta["elbo_initial"] = artifacts.elbo_initial;
  meta["elbo_final"] = artifacts.elbo_final;
  meta["wall_time_ms"] = ms_since(start);
  write_json(meta, out / "run_metadata.json");
  return 0;
}

int run_predict(const fs::path& model_path, const std::string& manifest_opt,
                const std::string& grid_opt, int quad_order,
                const fs::path& out) {
  const ModelSet set = load_model_set(model_path);
  const GhRule rule = gh_rule(quad_order);
  fs::create_directories(out);

  std::vector<std::string> names;
  PredictionSet predictions;
  std::vector<Eigen::MatrixXd> inputs;
  bool with_density = false;

  if (!manifest_opt.empty()) {
    const auto [manifest, data] = load_dataset(manifest_opt);
    check_compatible(set, manifest);
    for (const auto& o : manifest.outputs) names.push_back(o.name);
    for (const auto& o : data.outputs) inputs.push_back(o.X);
    predictions = set_predict_with_density(set, data, rule);
    with_density = true;
  } else {
    double lo = 0.0, hi = 1.0;
    int count = 0;
    if (!parse_grid(grid_opt, lo, hi, count)) {
      throw std::invalid_argument("cannot parse grid \"" + grid_opt + "\"");
    }
    const Eigen::Index p =
        set.independent ? set.models[0].input_dim() : set.models[0].input_dim();
    if (p != 1) {
      throw std::invalid_argument("--grid requires a one-dimensional input");
    }
    Eigen::MatrixXd X(count, 1);
    for (int i = 0; i < count; ++i) {
      X(i, 0) = count == 1 ? lo : lo + (hi - lo) * i / (count - 1.0);
    }
    for (Eigen::Index d = 0; d < set.num_outputs(); ++d) {
      names.push_back("output" + std::to_string(d));
      inputs.push_back(X);
    }
    if (set.independent) {
      for (std::size_t d = 0; d < set.models.size(); ++d) {
        HeterogeneousDataset probe;
        probe.outputs.push_back({X, Eigen::VectorXd()});
        PredictionSet one = predict(set.models[d], {X}, rule);
        predictions.outputs.push_back(std::move(one.outputs.front()));
      }
    } else {
      predictions = predict(set.models.front(), inputs, rule);
    }
  }

  char buf[64];
  const auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (std::size_t d = 0; d < names.size(); ++d) {
    const fs::path path = out / ("pred_" + names[d] + ".csv");
    std::ofstream file(path);
    if (!file) throw IoError("cannot write " + path.string());
    const int p = static_cast<int>(inputs[d].cols());
    for (int c = 0; c < p; ++c) file << 'x' << (c + 1) << ',';
    file << "mean,variance";
    if (with_density && predictions.outputs[d].log_density.size() > 0) {
      file << ",log_density";
    }
    file << '\n';
    for (Eigen::Index r = 0; r < inputs[d].rows(); ++r) {
      for (int c = 0; c < p; ++c) file << fmt(inputs[d](r, c)) << ',';
      file << fmt(predictions.outputs[d].mean[r]) << ','
           << fmt(predictions.outputs[d].variance[r]);
      if (with_density && predictions.outputs[d].log_density.size() > 0) {
        file << ',' << fmt(predictions.outputs[d].log_density[r]);
      }
      file << '\n';
    }
  }
  return 0;
}

json evaluate_to_record(const ModelSet& set, const DatasetManifest& manifest,
                        const HeterogeneousDataset& data, int quad_order,
                        std::uint64_t seed, const std::string& command,
                        bool per_output_table, double wall_ms,
                        std::optional<double> elbo_final_override) {
  const GhRule rule = gh_rule(quad_order);
  check_compatible(set, manifest);
  const NlpdResult res = set_nlpd(set, data, rule);
  const double elbo_final = elbo_final_override
                                ? *elbo_final_override
                                : set_elbo(set, data, rule);

  // table in units of 1e-2, four decimals
  std::printf("%-14s %12s\n", "output", "NLPD(x1e-2)");
  if (per_output_table) {
    for (std::size_t d = 0; d < manifest.outputs.size(); ++d) {
      if (std::isnan(res.per_output[d])) {
        std::printf("%-14s %12s\n", manifest.outputs[d].name.c_str(), "n/a");
      } else {
        std::printf("%-14s %12.4f\n", manifest.outputs[d].name.c_str(),
                    res.per_output[d] * 100.0);
      }
    }
  }
  std::printf("%-14s %12.4f\n", "Global", res.global * 100.0);

  json per = json::array();
  for (Eigen::Index d = 0; d < res.per_output.size(); ++d) {
    per.push_back(nan_to_null(res.per_output[d]));
  }
  return {{"command", command},
          {"seed", seed},
          {"nlpd_global", res.global},
          {"nlpd_per_output", per},
          {"elbo_final", elbo_final},
          {"wall_time_ms", wall_ms}};
}

int run_evaluate(const fs::path& model_path, const fs::path& manifest_path,
                 int quad_order, std::uint64_t seed, bool per_output,
                 const fs::path& out) {
  const auto start = Clock::now();
  const ModelSet set = load_model_set(model_path);
  const auto [manifest, data] = load_dataset(manifest_path);
  const json record =
      evaluate_to_record(set, manifest, data, quad_order, seed, "evaluate",
                         per_output, ms_since(start), std::nullopt);
  write_json(record, out / "result.json");
  return 0;
}

int run_compare(std::uint64_t seed, const fs::path& out, TrainFlags flags,
                int n1, int n2, const std::string& gap) {
  const auto start = Clock::now();
  int rc = run_generate("gap", seed, out / "data", n1, n2, gap, flags.q);
  if (rc != 0) return rc;

  const auto [manifest, train] =
      load_dataset(out / "data" / "train" / "manifest.json");
  const auto [test_manifest, test] =
      load_dataset(out / "data" / "test" / "manifest.json");

  flags.independent = false;
  const FitArtifacts joint =
      fit_and_save(manifest, train, flags, seed, out / "joint");
  flags.independent = true;
  const FitArtifacts indep =
      fit_and_save(manifest, train, flags, seed, out / "independent");

  std::printf("joint model\n");
  const json rec_joint = evaluate_to_record(
      load_model_set(joint.model_path), test_manifest, test, flags.quad_order,
      seed, "compare", true, ms_since(start), joint.elbo_final);
  write_json(rec_joint, out / "result_joint.json");

  std::printf("independent baseline\n");
  const json rec_indep = evaluate_to_record(
      load_model_set(indep.model_path), test_manifest, test, flags.quad_order,
      seed, "compare", true, ms_since(start), indep.elbo_final);
  write_json(rec_indep, out / "result_independent.json");

  // two-row summary table over the outputs plus the pooled column
  std::ofstream table(out / "compare_table.txt");
  table << "model        ";
  for (const auto& o : manifest.outputs) {
    char cell[64];
    std::snprintf(cell, sizeof(cell), " %12s", o.name.c_str());
    table << cell;
  }
  table << "       Global\n";
  const auto row = [&](const char* label, const json& rec) {
    table << label;
    for (const auto& v : rec["nlpd_per_output"]) {
      char cell[64];
      if (v.is_null()) {
        std::snprintf(cell, sizeof(cell), " %12s", "n/a");
      } else {
        std::snprintf(cell, sizeof(cell), " %12.4f", v.get<double>() * 100.0);
      }
      table << cell;
    }
    char cell[64];
    std::snprintf(cell, sizeof(cell), " %12.4f\n",
                  rec["nlpd_global"].get<double>() * 100.0);
    table << cell;
  };
  row("joint        ", rec_joint);
  row("independent  ", rec_indep);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous multi-output Gaussian process toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic experiment");
  std::string gen_experiment = "gap";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  int gen_n1 = 600, gen_n2 = 500, gen_q = 3;
  std::string gen_gap = "0.7:0.9";
  gen->add_option("--experiment", gen_experiment, "experiment name (gap)");
  gen->add_option("--seed", gen_seed, "root seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n1", gen_n1, "real-output samples");
  gen->add_option("--n2", gen_n2, "binary-output samples");
  gen->add_option("--gap", gen_gap, "gap interval lo:hi");
  gen->add_option("--q", gen_q, "latent processes of the generator");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "train a model on a manifest");
  std::string fit_manifest, fit_out;
  std::uint64_t fit_seed = 0;
  TrainFlags fit_flags;
  fit_cmd->add_option("--manifest", fit_manifest, "dataset manifest")->required();
  fit_cmd->add_option("--out", fit_out, "output directory")->required();
  fit_cmd->add_option("--seed", fit_seed, "root seed");
  fit_flags.add_to(fit_cmd);

  // predict
  auto* pred = app.add_subcommand("predict", "write predictive moments");
  std::string pred_model, pred_manifest, pred_grid, pred_out;
  int pred_quad = kDefaultQuadOrder;
  pred->add_option("--model", pred_model, "model file")->required();
  pred->add_option("--manifest", pred_manifest, "test manifest (with targets)");
  pred->add_option("--grid", pred_grid, "input grid lo:hi:count (p=1)");
  pred->add_option("--out", pred_out, "output directory")->required();
  pred->add_option("--quad-order", pred_quad, "Gauss-Hermite order");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "report NLPD on a test manifest");
  std::string eval_model, eval_manifest, eval_out;
  std::uint64_t eval_seed = 0;
  int eval_quad = kDefaultQuadOrder;
  bool eval_per_output = false;
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--manifest", eval_manifest, "test manifest")->required();
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--seed", eval_seed, "seed recorded in the result");
  eval->add_option("--quad-order", eval_quad, "Gauss-Hermite order");
  eval->add_flag("--per-output", eval_per_output, "one row per output");

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "generate, fit joint and independent models, evaluate both");
  std::uint64_t cmp_seed = 0;
  std::string cmp_out;
  int cmp_n1 = 600, cmp_n2 = 500;
  std::string cmp_gap = "0.7:0.9";
  TrainFlags cmp_flags;
  cmp->add_option("--seed", cmp_seed, "root seed");
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--n1", cmp_n1, "real-output samples");
  cmp->add_option("--n2", cmp_n2, "binary-output samples");
  cmp->add_option("--gap", cmp_gap, "gap interval lo:hi");
  cmp_flags.add_to(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      return run_generate(gen_experiment, gen_seed, gen_out, gen_n1, gen_n2,
                          gen_gap, gen_q);
    }
    if (fit_cmd->parsed()) {
      return run_fit(fit_manifest, fit_flags, fit_seed, fit_out);
    }
    if (pred->parsed()) {
      if (pred_manifest.empty() == pred_grid.empty()) {
        std::cerr << "predict: exactly one of --manifest or --grid is required\n";
        return 2;
      }
      return run_predict(pred_model, pred_manifest, pred_grid, pred_quad,
                         pred_out);
    }
    if (eval->parsed()) {
      return run_evaluate(eval_model, eval_manifest, eval_quad, eval_seed,
                          eval_per_output, eval_out);
    }
    if (cmp->parsed()) {
      return run_compare(cmp_seed, cmp_out, cmp_flags, cmp_n1, cmp_n2, cmp_gap);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
