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
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mogp/errors.hpp"
#include "mogp/inference.hpp"
#include "optimizer.hpp"

namespace mogp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

struct SpanMask {
  std::vector<std::pair<int, int>> spans;
  int total = 0;

  explicit SpanMask(std::vector<std::pair<int, int>> s) : spans(std::move(s)) {
    for (const auto& [b, e] : spans) total += e - b;
  }

  Eigen::VectorXd extract(const Eigen::VectorXd& full) const {
    Eigen::VectorXd sub(total);
    int k = 0;
    for (const auto& [b, e] : spans) {
      sub.segment(k, e - b) = full.segment(b, e - b);
      k += e - b;
    }
    return sub;
  }

  void inject(const Eigen::VectorXd& sub, Eigen::VectorXd& full) const {
    int k = 0;
    for (const auto& [b, e] : spans) {
      full.segment(b, e - b) = sub.segment(k, e - b);
      k += e - b;
    }
  }
};

// Cyclic mini-batch source: per-output epoch shuffles, consumed in chunks.
class Batcher {
public:
  Batcher(const HeterogeneousDataset& data, int batch_size, Rng rng)
      : batch_size_(batch_size), rng_(std::move(rng)) {
    perms_.resize(data.outputs.size());
    cursors_.assign(data.outputs.size(), 0);
    for (std::size_t d = 0; d < data.outputs.size(); ++d) {
      perms_[d].resize(data.outputs[d].size());
      std::iota(perms_[d].begin(), perms_[d].end(), 0);
      reshuffle(d);
    }
  }

  Batch next() {
    Batch batch(perms_.size());
    for (std::size_t d = 0; d < perms_.size(); ++d) {
      auto& perm = perms_[d];
      const auto n = static_cast<Eigen::Index>(perm.size());
      if (n == 0) continue;
      const Eigen::Index take = std::min<Eigen::Index>(batch_size_, n);
      if (cursors_[d] + take > n) {
        reshuffle(d);
        cursors_[d] = 0;
      }
      batch[d].assign(perm.begin() + cursors_[d],
                      perm.begin() + cursors_[d] + take);
      cursors_[d] += take;
    }
    return batch;
  }

private:
  void reshuffle(std::size_t d) {
    auto& perm = perms_[d];
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[rng_.index(i)]);
    }
  }

  Eigen::Index batch_size_;
  Rng rng_;
  std::vector<std::vector<Eigen::Index>> perms_;
  std::vector<Eigen::Index> cursors_;
};

void write_trace(const std::string& path, const std::vector<TraceEntry>& trace,
                 Eigen::Index D, Eigen::Index Q) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trace file " + path);
  out << "iteration,total";
  for (Eigen::Index d = 0; d < D; ++d) out << ",data_" << d;
  for (Eigen::Index q = 0; q < Q; ++q) out << ",kl_" << q;
  out << ",wall_ms\n";
  char buf[64];
  const auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const auto& e : trace) {
    out << e.iteration << ',' << fmt(e.report.total);
    for (Eigen::Index d = 0; d < D; ++d) out << ',' << fmt(e.report.data_terms[d]);
    for (Eigen::Index q = 0; q < Q; ++q) out << ',' << fmt(e.report.kl_terms[q]);
    out << ',' << fmt(e.wall_ms) << '\n';
  }
}

} // namespace

FitResult fit(const LmcModel& model0, const HeterogeneousDataset& data,
              const TrainConfig& config) {
  LmcModel model = model0;
  model.validate();
  const GhRule rule = gh_rule(config.quad_order);
  const ParamLayout layout = param_layout(model);
  const auto start = Clock::now();

  FitResult result;
  ElboReport report = elbo(model, data, std::nullopt, rule, config.jitter);
  if (!std::isfinite(report.total)) {
    throw NumericalError("fit: initial ELBO is not finite");
  }
  result.trace.push_back({0, report, ms_since(start)});

  Eigen::VectorXd best_params = pack_params(model);
  double best_total = report.total;
  const auto consider_best = [&](const Eigen::VectorXd& params, double total) {
    if (total > best_total) { // earliest state wins exact ties
      best_total = total;
      best_params = params;
    }
  };

  int iteration = 0;

  if (config.optimizer == OptimizerKind::full_batch) {
    Eigen::VectorXd full = pack_params(model);
    ElboReport last_report = report;

    const auto run_phase = [&](const SpanMask& mask, int max_iters,
                               const char* phase) {
      if (max_iters <= 0 || mask.total == 0) return;
      const detail::Objective objective = [&](const Eigen::VectorXd& sub,
                                              Eigen::VectorXd& grad_sub) {
        // Trial points can reach states the model rejects outright (an
        // overflowed kernel variance, an unfactorizable Gram matrix). Report
        // them as +inf so the line search backtracks past them.
        try {
          mask.inject(sub, full);
          unpack_params(model, full);
          auto [rep, grad] =
              elbo_grad(model, data, std::nullopt, rule, config.jitter);
          last_report = rep;
          grad_sub = -mask.extract(grad);
          return -rep.total;
        } catch (const std::invalid_argument&) {
        } catch (const NumericalError&) {
        }
        grad_sub = Eigen::VectorXd::Zero(sub.size());
        return std::numeric_limits<double>::infinity();
      };
      detail::LbfgsOptions opt;
      opt.max_iters = max_iters;
      opt.rel_tol = config.rel_tol;
      opt.rel_window = config.rel_window;
      const auto res = detail::minimize_lbfgs(
          objective, mask.extract(full), opt,
          [&](const Eigen::VectorXd& sub, double f) {
            mask.inject(sub, full);
            ++iteration;
            result.trace.push_back({iteration, last_report, ms_since(start)});
            consider_best(full, -f);
          });
      mask.inject(res.x, full);
      unpack_params(model, full);
      if (!std::isfinite(res.f)) {
        throw NumericalError(std::string("fit: non-finite ELBO after ") +
                             phase + " phase");
      }
    };

    const SpanMask e_mask(layout.e_step_spans());
    const SpanMask m_mask(layout.m_step_spans(config.optimize_z));
    double prev_cycle_total = report.total;
    for (int cycle = 0; cycle < config.em_cycles; ++cycle) {
      run_phase(e_mask, config.e_steps, "E");
      run_phase(m_mask, config.m_steps, "M");
      const double cycle_total =
          result.trace.empty() ? report.total : result.trace.back().report.total;
      if (cycle > 0 && std::abs(cycle_total - prev_cycle_total) <=
                           config.rel_tol * std::max(1.0, std::abs(cycle_total))) {
        break;
      }
      prev_cycle_total = cycle_total;
    }
  } else {
    Eigen::VectorXd full = pack_params(model);
    detail::Adadelta ada(layout.size(), config.adadelta_decay,
                         config.adadelta_epsilon, config.adadelta_step_rate);
    Batcher batcher(data, config.batch_size,
                    Rng(config.seed, "batching"));
    const auto e_spans = layout.e_step_spans();
    const auto m_spans = layout.m_step_spans(config.optimize_z);

    const auto noisy_step = [&](const std::vector<std::pair<int, int>>& spans,
                                const Batch& batch, const char* phase) {
      unpack_params(model, full);
      auto [rep, grad] = elbo_grad(model, data, batch, rule, config.jitter);
      (void)rep;
      Eigen::VectorXd gmin = -grad; // descend on the negated bound
      for (const auto& [b, e] : spans) {
        if (!gmin.segment(b, e - b).allFinite()) {
          throw NumericalError(std::string("fit: non-finite gradient in "
                                           "stochastic ") +
                               phase + " step at iteration " +
                               std::to_string(iteration));
        }
        ada.update_span(full, gmin, b, e);
      }
    };

    const auto checkpoint = [&]() {
      unpack_params(model, full);
      const ElboReport rep = elbo(model, data, std::nullopt, rule, config.jitter);
      if (!std::isfinite(rep.total)) {
        throw NumericalError("fit: non-finite full-batch ELBO at stochastic "
                             "checkpoint, iteration " +
                             std::to_string(iteration));
      }
      result.trace.push_back({iteration, rep, ms_since(start)});
      consider_best(full, rep.total);
    };

    for (int cycle = 0; cycle < config.em_cycles; ++cycle) {
      for (int step = 0; step < config.sv_steps_per_cycle; ++step) {
        const Batch batch = batcher.next();
        noisy_step(e_spans, batch, "E");
        noisy_step(m_spans, batch, "M");
        ++iteration;
        if (config.checkpoint_every > 0 &&
            iteration % config.checkpoint_every == 0) {
          checkpoint();
        }
      }
    }
    if (result.trace.back().iteration != iteration) checkpoint();
  }

  unpack_params(model, best_params);
  result.model = std::move(model);
  write_trace(config.trace_path, result.trace, data.num_outputs(),
              layout.Q);
  return result;
}

} // namespace mogp
