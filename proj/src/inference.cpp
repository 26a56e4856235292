/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#include "mogp/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "linalg.hpp"
#include "mogp/errors.hpp"

namespace mogp {

// ---------------------------------------------------------------------------
// InducingState / LmcModel
// ---------------------------------------------------------------------------

Eigen::MatrixXd InducingState::chol_factor(int q) const {
  Eigen::MatrixXd L = L_raw[q].template triangularView<Eigen::Lower>();
  L.diagonal() = L.diagonal().array().exp();
  return L;
}

Eigen::MatrixXd InducingState::covariance(int q) const {
  const Eigen::MatrixXd L = chol_factor(q);
  return L * L.transpose();
}

void LmcModel::validate() const {
  const Eigen::Index Q = num_latent();
  if (coeffs.num_latent() != Q) {
    throw std::invalid_argument("model: coefficient columns (" +
                                std::to_string(coeffs.num_latent()) +
                                ") != kernel count (" + std::to_string(Q) + ")");
  }
  if (coeffs.num_lpf() != total_lpf_count(likelihoods)) {
    throw std::invalid_argument(
        "model: coefficient rows (" + std::to_string(coeffs.num_lpf()) +
        ") do not match the likelihood list (J = " +
        std::to_string(total_lpf_count(likelihoods)) + ")");
  }
  const Eigen::Index M = inducing.num_inducing();
  if (inducing.num_latent() != Q ||
      static_cast<Eigen::Index>(inducing.L_raw.size()) != Q) {
    throw std::invalid_argument("model: inducing state has wrong latent count");
  }
  for (Eigen::Index q = 0; q < Q; ++q) {
    if (inducing.mu[q].size() != M || inducing.L_raw[q].rows() != M ||
        inducing.L_raw[q].cols() != M) {
      throw std::invalid_argument("model: inducing block " + std::to_string(q) +
                                  " has inconsistent size");
    }
  }
  if (!inducing.Z.allFinite()) {
    throw std::invalid_argument("model: non-finite inducing inputs");
  }
}

// ---------------------------------------------------------------------------
// Per-latent-process cache
// ---------------------------------------------------------------------------

namespace {

struct QCache {
  Eigen::MatrixXd Kzz;  // jittered Gram at Z
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter_added = 0.0;
  Eigen::MatrixXd Kinv;
  Eigen::MatrixXd L;    // effective Cholesky factor of S
  Eigen::MatrixXd S;
  Eigen::VectorXd b;    // Kinv * mu
  double logdet_K = 0.0;
  double logdet_S = 0.0;
};

QCache build_qcache(const LmcModel& model, int q, double jitter,
                    bool need_inverse) {
  QCache c;
  const Eigen::MatrixXd gram =
      model.kernels[q].gram(model.inducing.Z, model.inducing.Z);
  auto chol = detail::chol_with_jitter(gram, jitter,
                                       "inducing block q=" + std::to_string(q));
  c.jitter_added = chol.added;
  c.Kzz = gram;
  c.Kzz.diagonal().array() += chol.added;
  c.llt = std::move(chol.llt);
  c.L = model.inducing.chol_factor(q);
  c.S.noalias() = c.L * c.L.transpose();
  c.b = c.llt.solve(model.inducing.mu[q]);
  const Eigen::Index M = c.Kzz.rows();
  c.logdet_K =
      2.0 * Eigen::MatrixXd(c.llt.matrixL()).diagonal().array().log().sum();
  c.logdet_S = 2.0 * c.L.diagonal().array().log().sum();
  if (need_inverse) {
    c.Kinv = c.llt.solve(Eigen::MatrixXd::Identity(M, M));
  }
  return c;
}

// Per-(output, q) projection of the inducing posterior onto data inputs.
struct Projection {
  Eigen::MatrixXd Kxz;       // n x M
  Eigen::MatrixXd AxzK;      // n x M, Kxz * Kinv
  Eigen::MatrixXd KxzW;      // n x M, Kxz * (Kinv S Kinv - Kinv)
  Eigen::VectorXd proj_mean; // n
  Eigen::VectorXd var_term;  // n
};

// With `light` set, only proj_mean and var_term are retained (enough for the
// bound itself; the gradient path needs the matrices).
Projection project(const QCache& c, const RbfKernel& kernel,
                   const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                   bool light) {
  Projection p;
  p.Kxz = kernel.gram(X, Z);
  p.proj_mean.noalias() = p.Kxz * c.b;
  // var_term_n = k(x_n,x_n) + k_n' (Kinv S Kinv - Kinv) k_n
  const Eigen::MatrixXd KinvKzx = c.llt.solve(p.Kxz.transpose()); // M x n
  const Eigen::MatrixXd SKinvKzx = c.S * KinvKzx;                 // M x n
  Eigen::VectorXd quad(X.rows());
  for (Eigen::Index n = 0; n < X.rows(); ++n) {
    quad[n] = KinvKzx.col(n).dot(SKinvKzx.col(n) - p.Kxz.row(n).transpose());
  }
  p.var_term = kernel.gram_diag(X) + quad;
  if (!light) {
    p.AxzK = KinvKzx.transpose();
    p.KxzW.noalias() =
        (c.llt.solve(SKinvKzx) - KinvKzx).transpose(); // Kxz (Kinv S Kinv - Kinv)
  }
  return p;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= X.rows()) {
      throw std::invalid_argument("batch index out of range");
    }
    out.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
  }
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& y,
                       const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out[static_cast<Eigen::Index>(r)] = y[rows[r]];
  }
  return out;
}

// LPF flat indices belonging to output d.
std::vector<int> output_lpf_flats(const std::vector<LpfIndex>& lpfs, int d) {
  std::vector<int> out;
  for (const auto& idx : lpfs) {
    if (idx.d == d) out.push_back(idx.flat);
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Marginals
// ---------------------------------------------------------------------------

std::pair<Eigen::VectorXd, Eigen::VectorXd> q_f_marginals(
    const LmcModel& model, int lpf_flat_index, const Eigen::MatrixXd& X,
    double jitter) {
  model.validate();
  if (lpf_flat_index < 0 || lpf_flat_index >= model.num_lpf()) {
    throw std::invalid_argument("q_f_marginals: LPF index out of range");
  }
  const Eigen::Index Q = model.num_latent();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(X.rows());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index q = 0; q < Q; ++q) {
    const double a = model.coeffs.A(lpf_flat_index, q);
    if (a == 0.0) continue;
    const QCache c = build_qcache(model, static_cast<int>(q), jitter, false);
    const Projection p =
        project(c, model.kernels[q], X, model.inducing.Z, true);
    mean += a * p.proj_mean;
    var += a * a * p.var_term;
  }
  var = var.cwiseMax(0.0);
  return {mean, var};
}

MarginalGaussians output_marginals(const LmcModel& model, int output,
                                   const Eigen::MatrixXd& X, double jitter) {
  model.validate();
  if (output < 0 || output >= model.num_outputs()) {
    throw std::invalid_argument("output_marginals: output index out of range");
  }
  const auto lpfs = model.lpfs();
  const auto flats = output_lpf_flats(lpfs, output);
  const int jd = static_cast<int>(flats.size());
  MarginalGaussians m;
  m.mean = Eigen::MatrixXd::Zero(X.rows(), jd);
  m.variance = Eigen::MatrixXd::Zero(X.rows(), jd);
  for (Eigen::Index q = 0; q < model.num_latent(); ++q) {
    const QCache c = build_qcache(model, static_cast<int>(q), jitter, false);
    const Projection p =
        project(c, model.kernels[q], X, model.inducing.Z, true);
    for (int j = 0; j < jd; ++j) {
      const double a = model.coeffs.A(flats[j], q);
      if (a == 0.0) continue;
      m.mean.col(j) += a * p.proj_mean;
      m.variance.col(j) += a * a * p.var_term;
    }
  }
  m.variance = m.variance.cwiseMax(0.0);
  return m;
}

// ---------------------------------------------------------------------------
// KL and ELBO
// ---------------------------------------------------------------------------

namespace {

double kl_from_cache(const QCache& c, const Eigen::VectorXd& mu) {
  const Eigen::Index M = c.Kzz.rows();
  const double trace_term = c.llt.solve(c.S).trace();
  const double maha = mu.dot(c.b);
  return 0.5 * (trace_term + maha - static_cast<double>(M) + c.logdet_K -
                c.logdet_S);
}

} // namespace

Eigen::VectorXd kl_inducing(const LmcModel& model, double jitter) {
  model.validate();
  const Eigen::Index Q = model.num_latent();
  Eigen::VectorXd out(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    const QCache c = build_qcache(model, static_cast<int>(q), jitter, false);
    out[q] = kl_from_cache(c, model.inducing.mu[q]);
  }
  return out;
}

namespace {

struct BatchView {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  double scale = 1.0;
};

BatchView batch_view(const OutputData& data,
                     const std::optional<Batch>& batch, int d) {
  if (!batch) return {data.X, data.y, 1.0};
  const auto& rows = (*batch)[d];
  if (rows.empty() && data.size() > 0) {
    throw std::invalid_argument("elbo: empty batch for output " +
                                std::to_string(d) + " which has data");
  }
  BatchView v;
  v.X = gather_rows(data.X, rows);
  v.y = gather(data.y, rows);
  v.scale = rows.empty() ? 1.0
                         : static_cast<double>(data.size()) /
                               static_cast<double>(rows.size());
  return v;
}

void check_data(const LmcModel& model, const HeterogeneousDataset& data,
                const std::optional<Batch>& batch) {
  if (data.num_outputs() != model.num_outputs()) {
    throw std::invalid_argument("dataset output count (" +
                                std::to_string(data.num_outputs()) +
                                ") does not match the model (" +
                                std::to_string(model.num_outputs()) + ")");
  }
  if (batch && static_cast<Eigen::Index>(batch->size()) != model.num_outputs()) {
    throw std::invalid_argument("batch must list one index set per output");
  }
}

} // namespace

ElboReport elbo(const LmcModel& model, const HeterogeneousDataset& data,
                const std::optional<Batch>& batch, const GhRule& rule,
                double jitter) {
  model.validate();
  check_data(model, data, batch);
  const Eigen::Index D = model.num_outputs();
  const Eigen::Index Q = model.num_latent();
  const auto lpfs = model.lpfs();

  std::vector<QCache> caches;
  caches.reserve(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    caches.push_back(build_qcache(model, static_cast<int>(q), jitter, false));
  }

  ElboReport report;
  report.data_terms = Eigen::VectorXd::Zero(D);
  report.kl_terms = Eigen::VectorXd::Zero(Q);
  report.scale_factors = Eigen::VectorXd::Ones(D);

  for (Eigen::Index d = 0; d < D; ++d) {
    const BatchView view = batch_view(data.outputs[d], batch, static_cast<int>(d));
    report.scale_factors[d] = view.scale;
    if (view.X.rows() == 0) continue;
    const auto flats = output_lpf_flats(lpfs, static_cast<int>(d));
    const int jd = static_cast<int>(flats.size());

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(view.X.rows(), jd);
    Eigen::MatrixXd vars = Eigen::MatrixXd::Zero(view.X.rows(), jd);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const Projection p =
          project(caches[q], model.kernels[q], view.X, model.inducing.Z, true);
      for (int j = 0; j < jd; ++j) {
        const double a = model.coeffs.A(flats[j], q);
        if (a == 0.0) continue;
        means.col(j) += a * p.proj_mean;
        vars.col(j) += a * a * p.var_term;
      }
    }
    vars = vars.cwiseMax(0.0);

    const auto& lik = *model.likelihoods[d];
    double acc = 0.0;
    for (Eigen::Index n = 0; n < view.X.rows(); ++n) {
      acc += lik.var_exp(view.y[n], means.row(n).transpose(),
                         vars.row(n).transpose(), rule);
    }
    report.data_terms[d] = acc;
  }

  for (Eigen::Index q = 0; q < Q; ++q) {
    report.kl_terms[q] = kl_from_cache(caches[q], model.inducing.mu[q]);
  }
  report.total = report.scale_factors.dot(report.data_terms) -
                 report.kl_terms.sum();
  return report;
}

// ---------------------------------------------------------------------------
// Parameter packing
// ---------------------------------------------------------------------------

namespace {
int tri_size(int M) { return M * (M + 1) / 2; }
} // namespace

int ParamLayout::mu_offset(int q) const { return q * M; }
int ParamLayout::chol_offset(int q) const { return Q * M + q * tri_size(M); }
int ParamLayout::kernel_offset(int q) const {
  int off = Q * M + Q * tri_size(M);
  for (int k = 0; k < q; ++k) off += kernel_sizes[k];
  return off;
}
int ParamLayout::coeff_offset() const { return kernel_offset(Q); }
int ParamLayout::z_offset() const { return coeff_offset() + J * Q; }
int ParamLayout::size() const { return z_offset() + M * p; }

std::vector<std::pair<int, int>> ParamLayout::e_step_spans() const {
  return {{0, Q * M + Q * tri_size(M)}};
}

std::vector<std::pair<int, int>> ParamLayout::m_step_spans(bool include_z) const {
  const int start = kernel_offset(0);
  const int end = include_z ? size() : z_offset();
  return {{start, end}};
}

ParamLayout param_layout(const LmcModel& model) {
  ParamLayout layout;
  layout.Q = static_cast<int>(model.num_latent());
  layout.M = static_cast<int>(model.inducing.num_inducing());
  layout.J = static_cast<int>(model.num_lpf());
  layout.p = static_cast<int>(model.input_dim());
  for (const auto& k : model.kernels) {
    layout.kernel_sizes.push_back(static_cast<int>(k.num_hyperparameters()));
  }
  return layout;
}

Eigen::VectorXd pack_params(const LmcModel& model) {
  const ParamLayout layout = param_layout(model);
  Eigen::VectorXd theta(layout.size());
  for (int q = 0; q < layout.Q; ++q) {
    theta.segment(layout.mu_offset(q), layout.M) = model.inducing.mu[q];
    int k = layout.chol_offset(q);
    const auto& L = model.inducing.L_raw[q];
    for (int r = 0; r < layout.M; ++r) {
      for (int c = 0; c <= r; ++c) theta[k++] = L(r, c);
    }
    theta.segment(layout.kernel_offset(q), layout.kernel_sizes[q]) =
        model.kernels[q].log_hyperparameters();
  }
  int k = layout.coeff_offset();
  for (int i = 0; i < layout.J; ++i) {
    for (int q = 0; q < layout.Q; ++q) theta[k++] = model.coeffs.A(i, q);
  }
  k = layout.z_offset();
  for (int m = 0; m < layout.M; ++m) {
    for (int c = 0; c < layout.p; ++c) theta[k++] = model.inducing.Z(m, c);
  }
  return theta;
}

void unpack_params(LmcModel& model, const Eigen::VectorXd& theta) {
  const ParamLayout layout = param_layout(model);
  if (theta.size() != layout.size()) {
    throw std::invalid_argument("unpack_params: wrong parameter vector size");
  }
  for (int q = 0; q < layout.Q; ++q) {
    model.inducing.mu[q] = theta.segment(layout.mu_offset(q), layout.M);
    int k = layout.chol_offset(q);
    auto& L = model.inducing.L_raw[q];
    for (int r = 0; r < layout.M; ++r) {
      for (int c = 0; c <= r; ++c) L(r, c) = theta[k++];
    }
    model.kernels[q] = RbfKernel::from_log_hyperparameters(
        theta.segment(layout.kernel_offset(q), layout.kernel_sizes[q]));
  }
  int k = layout.coeff_offset();
  for (int i = 0; i < layout.J; ++i) {
    for (int q = 0; q < layout.Q; ++q) model.coeffs.A(i, q) = theta[k++];
  }
  k = layout.z_offset();
  for (int m = 0; m < layout.M; ++m) {
    for (int c = 0; c < layout.p; ++c) model.inducing.Z(m, c) = theta[k++];
  }
}

// ---------------------------------------------------------------------------
// ELBO gradient
// ---------------------------------------------------------------------------

std::pair<ElboReport, Eigen::VectorXd> elbo_grad(
    const LmcModel& model, const HeterogeneousDataset& data,
    const std::optional<Batch>& batch, const GhRule& rule, double jitter) {
  model.validate();
  check_data(model, data, batch);
  const Eigen::Index D = model.num_outputs();
  const Eigen::Index Q = model.num_latent();
  const Eigen::Index M = model.inducing.num_inducing();
  const Eigen::Index p = model.input_dim();
  const auto lpfs = model.lpfs();
  const ParamLayout layout = param_layout(model);

  std::vector<QCache> caches;
  caches.reserve(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    caches.push_back(build_qcache(model, static_cast<int>(q), jitter, true));
  }

  ElboReport report;
  report.data_terms = Eigen::VectorXd::Zero(D);
  report.kl_terms = Eigen::VectorXd::Zero(Q);
  report.scale_factors = Eigen::VectorXd::Ones(D);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.size());

  // Accumulators per latent process.
  std::vector<Eigen::VectorXd> grad_mu(Q, Eigen::VectorXd::Zero(M));
  std::vector<Eigen::MatrixXd> GS(Q, Eigen::MatrixXd::Zero(M, M));
  std::vector<Eigen::MatrixXd> Gzz(Q, Eigen::MatrixXd::Zero(M, M));
  std::vector<Eigen::VectorXd> grad_kern(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    grad_kern[q] = Eigen::VectorXd::Zero(layout.kernel_sizes[q]);
  }
  Eigen::MatrixXd grad_A = Eigen::MatrixXd::Zero(layout.J, Q);
  Eigen::MatrixXd grad_Z = Eigen::MatrixXd::Zero(M, p);

  const Eigen::MatrixXd& Z = model.inducing.Z;

  for (Eigen::Index d = 0; d < D; ++d) {
    const BatchView view = batch_view(data.outputs[d], batch, static_cast<int>(d));
    report.scale_factors[d] = view.scale;
    const Eigen::Index n = view.X.rows();
    if (n == 0) continue;
    const auto flats = output_lpf_flats(lpfs, static_cast<int>(d));
    const int jd = static_cast<int>(flats.size());

    std::vector<Projection> projs;
    projs.reserve(Q);
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n, jd);
    Eigen::MatrixXd vars = Eigen::MatrixXd::Zero(n, jd);
    for (Eigen::Index q = 0; q < Q; ++q) {
      projs.push_back(
          project(caches[q], model.kernels[q], view.X, Z, false));
      for (int j = 0; j < jd; ++j) {
        const double a = model.coeffs.A(flats[j], q);
        if (a == 0.0) continue;
        means.col(j) += a * projs[q].proj_mean;
        vars.col(j) += a * a * projs[q].var_term;
      }
    }
    vars = vars.cwiseMax(0.0);

    const auto& lik = *model.likelihoods[d];
    Eigen::MatrixXd gm(n, jd), gv(n, jd);
    double acc = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::VectorXd mu_r = means.row(r).transpose();
      const Eigen::VectorXd v_r = vars.row(r).transpose();
      acc += lik.var_exp(view.y[r], mu_r, v_r, rule);
      const auto [dmu, dv] = lik.var_exp_grad(view.y[r], mu_r, v_r, rule);
      gm.row(r) = dmu.transpose();
      gv.row(r) = dv.transpose();
    }
    report.data_terms[d] = acc;

    const double w = view.scale;
    for (Eigen::Index q = 0; q < Q; ++q) {
      const Projection& pr = projs[q];
      const QCache& c = caches[q];

      Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd cv = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < jd; ++j) {
        const double a = model.coeffs.A(flats[j], q);
        u += (w * a) * gm.col(j);
        cv += (w * a * a) * gv.col(j);
        grad_A(flats[j], q) +=
            w * (gm.col(j).dot(pr.proj_mean) +
                 2.0 * a * gv.col(j).dot(pr.var_term));
      }

      grad_mu[q].noalias() += pr.AxzK.transpose() * u;

      // d/dS: sum_n c_n alpha_n alpha_n', alpha = Kinv k_n
      GS[q].noalias() += pr.AxzK.transpose() * cv.asDiagonal() * pr.AxzK;

      // adjoint of the cross Gram
      Eigen::MatrixXd Gxz = u * c.b.transpose();
      Gxz.noalias() += 2.0 * (cv.asDiagonal() * pr.KxzW);

      // adjoint of the inducing Gram (data terms)
      const Eigen::MatrixXd Alpha = pr.AxzK.transpose();          // M x n
      const Eigen::MatrixXd Beta =
          c.Kinv * (c.S * Alpha);                                 // M x n
      const Eigen::MatrixXd AC = Alpha * cv.asDiagonal();         // M x n
      Gzz[q].noalias() -= (Alpha * u) * c.b.transpose();
      Gzz[q].noalias() -= Beta * AC.transpose();
      Gzz[q].noalias() -= AC * Beta.transpose();
      Gzz[q].noalias() += AC * Alpha.transpose();

      // kernel hyperparameters: cross-Gram contraction plus the diagonal
      // (which only responds to the log variance for this kernel family)
      grad_kern[q] += model.kernels[q].gram_grad_contract(view.X, Z, Gxz);
      grad_kern[q][0] += cv.sum() * model.kernels[q].variance();

      // inducing inputs via the cross Gram
      const Eigen::MatrixXd T = Gxz.cwiseProduct(pr.Kxz);
      const Eigen::VectorXd tcol = T.colwise().sum();
      for (Eigen::Index l = 0; l < p; ++l) {
        const double ell = model.kernels[q].lengthscale(l);
        grad_Z.col(l) +=
            (T.transpose() * view.X.col(l) - tcol.cwiseProduct(Z.col(l))) /
            (ell * ell);
      }
    }
  }

  // KL contributions and the chain through the Cholesky parameterization.
  for (Eigen::Index q = 0; q < Q; ++q) {
    const QCache& c = caches[q];
    report.kl_terms[q] = kl_from_cache(c, model.inducing.mu[q]);

    grad_mu[q] -= c.b;

    Eigen::MatrixXd Sinv = c.L.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(M, M));
    Sinv = c.L.transpose().triangularView<Eigen::Upper>().solve(Sinv);
    GS[q] -= 0.5 * (c.Kinv - Sinv);

    const Eigen::MatrixXd P = c.Kinv * c.S * c.Kinv;
    Gzz[q] -=
        0.5 * (c.Kinv - P - c.b * c.b.transpose());

    // log-variance derivative includes the (variance-proportional) jitter
    const Eigen::MatrixXd gram_zz = c.Kzz - c.jitter_added * Eigen::MatrixXd::Identity(M, M);
    Eigen::VectorXd kern_zz =
        model.kernels[q].gram_grad_contract(Z, Z, Gzz[q]);
    kern_zz[0] += c.jitter_added * Gzz[q].trace();
    grad_kern[q] += kern_zz;

    // inducing inputs via the inducing Gram (diagonal entries are constant)
    Eigen::MatrixXd H = (Gzz[q] + Gzz[q].transpose()).cwiseProduct(gram_zz);
    H.diagonal().setZero();
    const Eigen::VectorXd hsum = H.colwise().sum();
    for (Eigen::Index l = 0; l < p; ++l) {
      const double ell = model.kernels[q].lengthscale(l);
      grad_Z.col(l) +=
          (H * Z.col(l) - hsum.cwiseProduct(Z.col(l))) / (ell * ell);
    }

    // S = L L' chain, then the exp reparameterization of the diagonal
    const Eigen::MatrixXd GSsym = 0.5 * (GS[q] + GS[q].transpose());
    Eigen::MatrixXd GL = 2.0 * GSsym * c.L;
    int k = layout.chol_offset(static_cast<int>(q));
    for (int r = 0; r < M; ++r) {
      for (int col = 0; col <= r; ++col) {
        const double g = r == col ? GL(r, r) * c.L(r, r) : GL(r, col);
        grad[k++] = g;
      }
    }

    grad.segment(layout.mu_offset(static_cast<int>(q)), M) = grad_mu[q];
    grad.segment(layout.kernel_offset(static_cast<int>(q)),
                 layout.kernel_sizes[q]) = grad_kern[q];
  }

  int k = layout.coeff_offset();
  for (int i = 0; i < layout.J; ++i) {
    for (int q = 0; q < layout.Q; ++q) grad[k++] = grad_A(i, q);
  }
  k = layout.z_offset();
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index c = 0; c < p; ++c) grad[k++] = grad_Z(m, c);
  }

  report.total = report.scale_factors.dot(report.data_terms) -
                 report.kl_terms.sum();
  return {report, grad};
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

LmcModel init_model(const std::vector<LikelihoodPtr>& likelihoods,
                    const HeterogeneousDataset& data, int num_latent,
                    int num_inducing, Rng& rng, bool shared_lengthscale,
                    double jitter) {
  if (likelihoods.empty()) {
    throw std::invalid_argument("init_model: empty likelihood list");
  }
  if (num_latent < 1 || num_inducing < 1) {
    throw std::invalid_argument("init_model: need at least one latent process "
                                "and one inducing point");
  }
  const Eigen::Index total = data.total_size();
  if (total < num_inducing) {
    throw std::invalid_argument(
        "init_model: fewer data points (" + std::to_string(total) +
        ") than inducing points (" + std::to_string(num_inducing) + ")");
  }
  const Eigen::Index p = data.input_dim();

  Eigen::MatrixXd pooled(total, p);
  Eigen::Index at = 0;
  for (const auto& o : data.outputs) {
    if (o.size() == 0) continue;
    pooled.middleRows(at, o.size()) = o.X;
    at += o.size();
  }

  // Partial Fisher-Yates: a uniform subsample without replacement.
  std::vector<Eigen::Index> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (int m = 0; m < num_inducing; ++m) {
    const auto j =
        m + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(total - m)));
    std::swap(idx[m], idx[j]);
  }
  Eigen::MatrixXd Z(num_inducing, p);
  for (int m = 0; m < num_inducing; ++m) Z.row(m) = pooled.row(idx[m]);

  // Lengthscales: half the per-dimension standard deviation of the inputs.
  Eigen::VectorXd mean = pooled.colwise().mean();
  Eigen::VectorXd sd(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    sd[c] = std::sqrt((pooled.col(c).array() - mean[c]).square().mean());
    if (sd[c] <= 0.0) sd[c] = 1.0;
  }
  Eigen::VectorXd ell;
  if (shared_lengthscale) {
    ell = Eigen::VectorXd::Constant(1, 0.5 * sd.mean());
  } else {
    ell = 0.5 * sd;
  }

  LmcModel model;
  model.likelihoods = likelihoods;
  const int J = total_lpf_count(likelihoods);
  model.coeffs.A.resize(J, num_latent);
  const double coeff_scale = 1.0 / std::sqrt(static_cast<double>(num_latent));
  for (int i = 0; i < J; ++i) {
    for (int q = 0; q < num_latent; ++q) {
      model.coeffs.A(i, q) = coeff_scale * rng.normal();
    }
  }
  for (int q = 0; q < num_latent; ++q) {
    model.kernels.emplace_back(1.0, ell);
  }
  model.inducing.Z = std::move(Z);
  model.inducing.mu.assign(num_latent,
                           Eigen::VectorXd::Zero(num_inducing));
  model.inducing.L_raw.resize(num_latent);
  for (int q = 0; q < num_latent; ++q) {
    const Eigen::MatrixXd gram =
        model.kernels[q].gram(model.inducing.Z, model.inducing.Z);
    const auto chol = detail::chol_with_jitter(
        gram, jitter, "initial inducing block q=" + std::to_string(q));
    Eigen::MatrixXd L = Eigen::MatrixXd(chol.llt.matrixL());
    L.diagonal() = L.diagonal().array().log();
    model.inducing.L_raw[q] = L;
  }
  model.validate();
  return model;
}

} // namespace mogp
