/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_SRC_OPTIMIZER_HPP
#define MOGP_SRC_OPTIMIZER_HPP

#include <Eigen/Core>
#include <deque>
#include <functional>

namespace mogp::detail {

/// Objective for minimization: fills the gradient and returns f(x).
using Objective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Called after every accepted step with the new iterate and value.
using AcceptCallback = std::function<void(const Eigen::VectorXd&, double)>;

struct LbfgsOptions {
  int max_iters = 100;
  int memory = 20;
  double grad_tol = 1e-9;    // stop when the gradient inf-norm drops below
  double rel_tol = 1e-6;     // relative f change over rel_window accepted steps
  int rel_window = 10;
  double armijo_c = 1e-4;
  double wolfe_c = 0.9;      // curvature constant of the weak Wolfe condition
  double min_step = 1e-20;
  double max_step = 1e6;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. Accepted steps are
/// monotonically non-increasing in f. Non-finite trial values are treated as
/// failed trials and backtracked past.
inline LbfgsResult minimize_lbfgs(const Objective& objective,
                                  Eigen::VectorXd x0, const LbfgsOptions& opt,
                                  const AcceptCallback& on_accept = nullptr) {
  const Eigen::Index n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);

  Eigen::VectorXd g(n), g_new(n);
  double f = objective(res.x, g);
  res.f = f;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> f_window{f};

  for (int it = 0; it < opt.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd dir = -g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      dir *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }

    double slope = g.dot(dir);
    if (!(slope < 0.0)) { // not a descent direction; fall back to steepest
      dir = -g;
      slope = g.dot(dir);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Weak-Wolfe line search by bisection with expansion. Armijo failures
    // shrink toward zero (interpolating when the trial value is usable);
    // curvature failures expand, so well-scaled quasi-Newton steps are not
    // truncated at unit length.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double step = 1.0;
    double f_new = f;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * dir;
      f_new = objective(x_new, g_new);
      if (!std::isfinite(f_new) ||
          f_new > f + opt.armijo_c * step * slope) {
        hi = step;
        double next = 0.5 * (lo + hi);
        if (std::isfinite(f_new) && f_new > f) {
          // quadratic interpolation through (0, f), (step, f_new), slope
          const double denom = 2.0 * (f_new - f - slope * step);
          if (denom > 0.0) {
            const double interp = -slope * step * step / denom;
            if (interp > lo + 0.1 * (hi - lo) && interp < hi * 0.9) {
              next = interp;
            }
          }
        }
        step = next;
      } else if (g_new.dot(dir) < opt.wolfe_c * slope &&
                 step < opt.max_step) {
        lo = step;
        accepted = true; // admissible even if the curvature probe stops here
        step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * step;
      } else {
        accepted = true;
        break;
      }
      if (step < opt.min_step || hi - lo < opt.min_step) break;
    }
    if (accepted && (!std::isfinite(f_new) ||
                     f_new > f + opt.armijo_c * step * slope)) {
      // the last probe left the admissible region; re-evaluate at lo
      step = lo;
      if (step <= 0.0) break;
      x_new = res.x + step * dir;
      f_new = objective(x_new, g_new);
      if (!std::isfinite(f_new) || f_new > f) break;
    }
    if (!accepted) break; // no admissible step along this direction

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    res.x = std::move(x_new);
    f = f_new;
    g = g_new;
    res.f = f;
    ++res.iterations;
    if (on_accept) on_accept(res.x, f);

    f_window.push_back(f);
    if (static_cast<int>(f_window.size()) > opt.rel_window + 1) {
      f_window.pop_front();
    }
    if (static_cast<int>(f_window.size()) == opt.rel_window + 1) {
      const double drop = f_window.front() - f_window.back();
      if (drop <= opt.rel_tol * std::max(1.0, std::abs(f))) {
        res.converged = true;
        break;
      }
    }
  }
  return res;
}

/// ADADELTA accumulator state over a full parameter vector; updates are
/// applied to index spans so the same state can serve interleaved E/M steps.
struct Adadelta {
  double decay = 0.9;
  double epsilon = 1e-6;
  double step_rate = 1.0;
  Eigen::VectorXd acc_grad;  // running average of squared gradients
  Eigen::VectorXd acc_step;  // running average of squared updates

  explicit Adadelta(Eigen::Index n, double decay_, double epsilon_,
                    double step_rate_)
      : decay(decay_), epsilon(epsilon_), step_rate(step_rate_),
        acc_grad(Eigen::VectorXd::Zero(n)), acc_step(Eigen::VectorXd::Zero(n)) {}

  /// One descent step of the coordinates in [begin, end) against gradient g
  /// (of the minimized function).
  void update_span(Eigen::VectorXd& x, const Eigen::VectorXd& g, int begin,
                   int end) {
    for (int i = begin; i < end; ++i) {
      acc_grad[i] = decay * acc_grad[i] + (1.0 - decay) * g[i] * g[i];
      const double dx = -std::sqrt(acc_step[i] + epsilon) /
                        std::sqrt(acc_grad[i] + epsilon) * g[i] * step_rate;
      acc_step[i] = decay * acc_step[i] + (1.0 - decay) * dx * dx;
      x[i] += dx;
    }
  }
};

} // namespace mogp::detail

#endif
