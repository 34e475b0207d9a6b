#include "qsgp/estimators.hpp"

#include <cmath>

#include "qsgp/gauss_hermite.hpp"

namespace qsgp {

HyperGrad& HyperGrad::add_scaled(const HyperGrad& other, double w) {
  if (other.log_lengthscales.size() > 0) {
    ensure_dim(other.log_lengthscales.size());
    log_lengthscales += w * other.log_lengthscales;
  }
  log_signal_variance += w * other.log_signal_variance;
  log_noise_variance += w * other.log_noise_variance;
  log_laplace_scale += w * other.log_laplace_scale;
  return *this;
}

namespace {

// Lightweight read views so the covariance estimators run over either the
// chevron factor or a plain dense lower-triangular matrix.
struct ChevronViewT {
  const ChevronCholesky* C;
  Index dim() const { return C->dim(); }
  double entry(Index r, Index c) const { return C->entry(r, c); }
  double diag(Index r) const { return C->diag(r); }
  bool in_pattern(Index r, Index c) const { return C->in_pattern(r, c); }
};

struct DenseLowerViewT {
  const MatrixXd* C;
  Index dim() const { return C->rows(); }
  double entry(Index r, Index c) const { return r >= c ? (*C)(r, c) : 0.0; }
  double diag(Index r) const { return (*C)(r, r); }
  bool in_pattern(Index r, Index c) const { return r >= c; }
};

template <class View>
MatrixXd gather_factor(const View& view, IndexSpan rows, IndexSpan cols) {
  MatrixXd out(static_cast<Index>(rows.size()),
               static_cast<Index>(cols.size()));
  for (Index b = 0; b < out.cols(); ++b)
    for (Index a = 0; a < out.rows(); ++a)
      out(a, b) = view.entry(rows[a], cols[b]);
  return out;
}

void scatter_add(std::unordered_map<Index, double>& g, IndexSpan idx,
                 const VectorXd& vals) {
  for (Index b = 0; b < vals.size(); ++b) g[idx[b]] += vals[b];
}

void check_data(const BasisExpansion& ex, const MatrixXd& X, double sigma_sq) {
  require(X.cols() == ex.input_dim(), "estimator: data dimension mismatch");
  require(sigma_sq > 0, "estimator: sigma_sq must be positive");
}

}  // namespace

StochasticEstimate estimate_l_mu(const IndexBatch& batch,
                                 const BasisExpansion& ex, const MatrixXd& X,
                                 const VectorXd& y, double sigma_sq,
                                 const VectorXd& mu,
                                 const EstimatorOptions& opts) {
  check_data(ex, X, sigma_sq);
  require(y.size() == X.rows(), "estimate_l_mu: y size mismatch");
  require(mu.size() == ex.m(), "estimate_l_mu: mu size mismatch");

  const auto n = static_cast<double>(X.rows());
  const auto m = static_cast<double>(ex.m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const auto nt = static_cast<double>(batch.n_tilde());
  const double alpha = 2.0 * n * m / (sigma_sq * nt * mt);
  const double beta = n * m * m / (sigma_sq * nt * mt * mt);
  const double gamma = (m / mt) * (m / mt);

  const MatrixXd phi_i = ex.feature_block(X, batch.l_tilde, batch.i_tilde);
  const MatrixXd phi_j = ex.feature_block(X, batch.l_tilde, batch.j_tilde);
  const VectorXd mu_i = gather(mu, batch.i_tilde);
  const VectorXd mu_j = gather(mu, batch.j_tilde);
  const VectorXd yb = gather(y, batch.l_tilde);
  const VectorXd u = phi_i * mu_i;
  const VectorXd w = phi_j * mu_j;
  const MatrixXd sb = ex.prior_precision_block(batch.j_tilde, batch.i_tilde);
  const VectorXd s_mu_i = sb * mu_i;              // j~ slots
  const VectorXd st_mu_j = sb.transpose() * mu_j; // i~ slots

  StochasticEstimate est;
  est.value = -alpha * yb.dot(u) + beta * w.dot(u) + gamma * mu_j.dot(s_mu_i);
  est.touched = touched_union(batch);

  // d/dmu over sampled slots: the data term feeds i~ only, the quadratic and
  // prior terms feed both draws.
  scatter_add(est.grad_mu, batch.i_tilde,
              (-alpha * (phi_i.transpose() * yb) +
               beta * (phi_i.transpose() * w) + gamma * st_mu_j)
                  .eval());
  scatter_add(est.grad_mu, batch.j_tilde,
              (beta * (phi_j.transpose() * u) + gamma * s_mu_i).eval());

  if (opts.hyper_grad) {
    est.has_hyper_grad = true;
    const auto d_phi_i =
        ex.feature_block_grad_hyper(X, batch.l_tilde, batch.i_tilde);
    const auto d_phi_j =
        ex.feature_block_grad_hyper(X, batch.l_tilde, batch.j_tilde);
    const Index d = ex.input_dim();
    est.grad_hyper.ensure_dim(d);
    for (Index t = 0; t < d + 1; ++t) {
      const VectorXd du = d_phi_i[t] * mu_i;
      const VectorXd dw = d_phi_j[t] * mu_j;
      const double g = -alpha * yb.dot(du) + beta * (dw.dot(u) + w.dot(du));
      if (t < d)
        est.grad_hyper.log_lengthscales[t] = g;
      else
        est.grad_hyper.log_signal_variance = g;
    }
    // Both data-dependent terms carry a 1/s2 factor.
    est.grad_hyper.log_noise_variance = alpha * yb.dot(u) - beta * w.dot(u);
  }

  if (opts.log_s_grad) {
    const VectorXd& s = ex.dictionary_s();
    for (Index bj = 0; bj < batch.m_tilde(); ++bj)
      for (Index bi = 0; bi < batch.m_tilde(); ++bi)
        if (batch.j_tilde[bj] == batch.i_tilde[bi]) {
          const Index k = batch.i_tilde[bi];
          est.grad_log_s[k] += gamma * mu[k] * mu[k] * s[k];
        }
  }
  return est;
}

namespace {

template <class View>
StochasticEstimate l_sigma_impl(const IndexBatch& batch,
                                const BasisExpansion& ex, const MatrixXd& X,
                                double sigma_sq, const View& view,
                                const EstimatorOptions& opts) {
  check_data(ex, X, sigma_sq);
  require(view.dim() == ex.m(), "estimate_l_sigma: factor size mismatch");
  for (const Index r : batch.r_tilde)
    if (!(view.diag(r) > 0.0))
      throw InvalidState("estimate_l_sigma: sampled diagonal entry <= 0");

  const auto n = static_cast<double>(X.rows());
  const auto m = static_cast<double>(ex.m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const auto nt = static_cast<double>(batch.n_tilde());
  const double outer = m / mt;
  const double beta = n * m * m / (sigma_sq * nt * mt * mt);
  const double gamma = (m / mt) * (m / mt);

  const MatrixXd phi_i = ex.feature_block(X, batch.l_tilde, batch.i_tilde);
  const MatrixXd phi_j = ex.feature_block(X, batch.l_tilde, batch.j_tilde);
  const MatrixXd ci = gather_factor(view, batch.i_tilde, batch.r_tilde);
  const MatrixXd cj = gather_factor(view, batch.j_tilde, batch.r_tilde);
  const MatrixXd sb = ex.prior_precision_block(batch.j_tilde, batch.i_tilde);
  const MatrixXd p = phi_i * ci;   // n~ x m~, column t = Phi_{l~,i~} c_{i~,r_t}
  const MatrixXd q = phi_j * cj;
  const MatrixXd s_ci = sb * ci;              // j~ slots
  const MatrixXd st_cj = sb.transpose() * cj; // i~ slots

  StochasticEstimate est;
  est.touched = touched_union(batch);
  double data_part = 0.0, prior_part = 0.0, log_part = 0.0;
  for (Index t = 0; t < batch.m_tilde(); ++t) {
    data_part += q.col(t).dot(p.col(t));
    prior_part += cj.col(t).dot(s_ci.col(t));
    log_part += std::log(view.diag(batch.r_tilde[t]));
  }
  est.value = outer * (beta * data_part + gamma * prior_part - 2.0 * log_part);

  // d/dC: per sampled column r_t,
  //   data term: beta Phi_i'(q_t) into (i~, r_t), beta Phi_j'(p_t) into (j~, r_t)
  //   prior term: gamma (S' c_{j~,t}) into (i~, r_t), gamma (S c_{i~,t}) into (j~, r_t)
  //   log term: -2 / c_rr at (r_t, r_t);
  // all scaled by the outer m/m~, restricted to slots inside the pattern.
  for (Index t = 0; t < batch.m_tilde(); ++t) {
    const Index r = batch.r_tilde[t];
    const VectorXd gi = outer * (beta * (phi_i.transpose() * q.col(t)) +
                                 gamma * st_cj.col(t));
    const VectorXd gj = outer * (beta * (phi_j.transpose() * p.col(t)) +
                                 gamma * s_ci.col(t));
    for (Index b = 0; b < batch.m_tilde(); ++b) {
      if (view.in_pattern(batch.i_tilde[b], r))
        est.grad_C[pack_rc(batch.i_tilde[b], r)] += gi[b];
      if (view.in_pattern(batch.j_tilde[b], r))
        est.grad_C[pack_rc(batch.j_tilde[b], r)] += gj[b];
    }
    est.grad_C[pack_rc(r, r)] += -2.0 * outer / view.diag(r);
  }

  if (opts.hyper_grad) {
    est.has_hyper_grad = true;
    const auto d_phi_i =
        ex.feature_block_grad_hyper(X, batch.l_tilde, batch.i_tilde);
    const auto d_phi_j =
        ex.feature_block_grad_hyper(X, batch.l_tilde, batch.j_tilde);
    const Index d = ex.input_dim();
    est.grad_hyper.ensure_dim(d);
    for (Index t = 0; t < d + 1; ++t) {
      const MatrixXd dp = d_phi_i[t] * ci;
      const MatrixXd dq = d_phi_j[t] * cj;
      double g = 0.0;
      for (Index c = 0; c < batch.m_tilde(); ++c)
        g += dq.col(c).dot(p.col(c)) + q.col(c).dot(dp.col(c));
      g *= outer * beta;
      if (t < d)
        est.grad_hyper.log_lengthscales[t] = g;
      else
        est.grad_hyper.log_signal_variance = g;
    }
    est.grad_hyper.log_noise_variance = -outer * beta * data_part;
  }

  if (opts.log_s_grad) {
    const VectorXd& s = ex.dictionary_s();
    for (Index bj = 0; bj < batch.m_tilde(); ++bj)
      for (Index bi = 0; bi < batch.m_tilde(); ++bi)
        if (batch.j_tilde[bj] == batch.i_tilde[bi]) {
          const Index k = batch.i_tilde[bi];
          double acc = 0.0;
          for (Index t = 0; t < batch.m_tilde(); ++t)
            acc += cj(bj, t) * ci(bi, t);
          est.grad_log_s[k] += outer * gamma * acc * s[k];
        }
  }
  return est;
}

}  // namespace

StochasticEstimate estimate_l_sigma(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const MatrixXd& X, double sigma_sq,
                                    const ChevronCholesky& C,
                                    const EstimatorOptions& opts) {
  return l_sigma_impl(batch, ex, X, sigma_sq, ChevronViewT{&C}, opts);
}

StochasticEstimate estimate_l_sigma(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const MatrixXd& X, double sigma_sq,
                                    const MatrixXd& C,
                                    const EstimatorOptions& opts) {
  require(C.rows() == C.cols(), "estimate_l_sigma: C must be square");
  return l_sigma_impl(batch, ex, X, sigma_sq, DenseLowerViewT{&C}, opts);
}

StochasticEstimate estimate_l_const(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const VectorXd& y, double sigma_sq,
                                    const EstimatorOptions& opts) {
  if (!ex.has_diagonal_prior())
    throw UnsupportedOperation(
        "estimate_l_const: requires a diagonal prior precision");
  require(sigma_sq > 0, "estimate_l_const: sigma_sq must be positive");
  const auto n = static_cast<double>(y.size());
  const auto m = static_cast<double>(ex.m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const auto nt = static_cast<double>(batch.n_tilde());

  double log_s_sum = 0.0;
  for (const Index i : batch.i_tilde) log_s_sum += std::log(ex.s_diag(i));
  const VectorXd yb = gather(y, batch.l_tilde);
  const double ysq = yb.squaredNorm();

  StochasticEstimate est;
  est.value = -(m / mt) * log_s_sum - m +
              n * std::log(2.0 * std::numbers::pi * sigma_sq) +
              n / (sigma_sq * nt) * ysq;
  est.touched = touched_union(batch);
  if (opts.hyper_grad) {
    est.has_hyper_grad = true;
    est.grad_hyper.ensure_dim(ex.input_dim());
    est.grad_hyper.log_noise_variance = n - n / (sigma_sq * nt) * ysq;
  }
  if (opts.log_s_grad) {
    for (const Index i : batch.i_tilde) est.grad_log_s[i] += -(m / mt);
  }
  return est;
}

namespace {

template <class View>
StochasticEstimate elbo_lower_bound_impl(const IndexBatch& batch,
                                         const BasisExpansion& ex,
                                         const MatrixXd& X,
                                         const SiteProjection& sites,
                                         const VectorXd& mu, const View& view,
                                         int quad_points,
                                         const EstimatorOptions& opts) {
  check_data(ex, X, 1.0);
  require(mu.size() == ex.m(), "estimate_elbo_lower_bound: mu size");
  require(sites.size() == X.rows(), "estimate_elbo_lower_bound: sites size");
  require(quad_points >= 0, "estimate_elbo_lower_bound: quad_points >= 0");
  if (quad_points == 0)
    require(batch.has_z,
            "estimate_elbo_lower_bound: z-sampling mode needs a batch with z");

  const auto n = static_cast<double>(X.rows());
  const auto m = static_cast<double>(ex.m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const auto nt = static_cast<double>(batch.n_tilde());
  const double row_scale = n / nt;
  const double scale_mu = m / mt;
  const double scale_cov = (m / mt) * (m / mt) * (m / mt);

  const MatrixXd phi_i = ex.feature_block(X, batch.l_tilde, batch.i_tilde);
  const MatrixXd phi_j = ex.feature_block(X, batch.l_tilde, batch.j_tilde);
  const VectorXd mu_i = gather(mu, batch.i_tilde);
  const MatrixXd ci = gather_factor(view, batch.i_tilde, batch.r_tilde);
  const MatrixXd cj = gather_factor(view, batch.j_tilde, batch.r_tilde);
  const MatrixXd p = phi_i * ci;
  const MatrixXd q = phi_j * cj;

  const VectorXd a = scale_mu * (phi_i * mu_i);
  VectorXd v(batch.n_tilde());
  for (Index l = 0; l < batch.n_tilde(); ++l)
    v[l] = scale_cov * q.row(l).dot(p.row(l));

  VectorXd nodes, weights;
  if (quad_points > 0) {
    const GaussHermite& rule = GaussHermite::get(quad_points);
    nodes = rule.nodes;
    weights = rule.weights;
  } else {
    nodes = VectorXd::Constant(1, batch.z);
    weights = VectorXd::Constant(1, 1.0);
  }

  StochasticEstimate est;
  est.touched = touched_union(batch);
  // Per-row averaged slope wrt the mean argument (g_coef) and wrt the
  // z-coefficient argument (h_coef).
  VectorXd g_coef = VectorXd::Zero(batch.n_tilde());
  VectorXd h_coef = VectorXd::Zero(batch.n_tilde());
  double site_scale_grad = 0.0;
  for (Index l = 0; l < batch.n_tilde(); ++l) {
    const Index row = batch.l_tilde[l];
    for (Index qn = 0; qn < nodes.size(); ++qn) {
      const double arg = a[l] + nodes[qn] * v[l];
      est.value += weights[qn] * sites.log_g(row, arg);
      const double slope = weights[qn] * sites.dlog_g_du(row, arg);
      g_coef[l] += slope;
      h_coef[l] += slope * nodes[qn];
      if (opts.hyper_grad)
        site_scale_grad += weights[qn] * sites.dlog_g_dlog_scale(row, arg);
    }
  }
  est.value *= row_scale;

  scatter_add(est.grad_mu, batch.i_tilde,
              (row_scale * scale_mu * (phi_i.transpose() * g_coef)).eval());

  // dv_l/dC: column t of the r~ draw contributes
  //   phi_i(l, b) q(l, t) into slot (i~_b, r_t) and
  //   phi_j(l, b) p(l, t) into slot (j~_b, r_t), scaled by (m/m~)^3.
  for (Index t = 0; t < batch.m_tilde(); ++t) {
    const Index r = batch.r_tilde[t];
    const VectorXd gi = row_scale * scale_cov *
                        (phi_i.transpose() * h_coef.cwiseProduct(q.col(t)));
    const VectorXd gj = row_scale * scale_cov *
                        (phi_j.transpose() * h_coef.cwiseProduct(p.col(t)));
    for (Index b = 0; b < batch.m_tilde(); ++b) {
      if (view.in_pattern(batch.i_tilde[b], r))
        est.grad_C[pack_rc(batch.i_tilde[b], r)] += gi[b];
      if (view.in_pattern(batch.j_tilde[b], r))
        est.grad_C[pack_rc(batch.j_tilde[b], r)] += gj[b];
    }
  }

  if (opts.hyper_grad) {
    est.has_hyper_grad = true;
    const Index d = ex.input_dim();
    est.grad_hyper.ensure_dim(d);
    if (ex.kind() == ExpansionKind::kRffSeArd) {
      const auto d_phi_i =
          ex.feature_block_grad_hyper(X, batch.l_tilde, batch.i_tilde);
      const auto d_phi_j =
          ex.feature_block_grad_hyper(X, batch.l_tilde, batch.j_tilde);
      for (Index t = 0; t < d + 1; ++t) {
        const VectorXd da = scale_mu * (d_phi_i[t] * mu_i);
        const MatrixXd dp = d_phi_i[t] * ci;
        const MatrixXd dq = d_phi_j[t] * cj;
        double g = 0.0;
        for (Index l = 0; l < batch.n_tilde(); ++l) {
          const double dv =
              scale_cov * (dq.row(l).dot(p.row(l)) + q.row(l).dot(dp.row(l)));
          g += g_coef[l] * da[l] + h_coef[l] * dv;
        }
        g *= row_scale;
        if (t < d)
          est.grad_hyper.log_lengthscales[t] = g;
        else
          est.grad_hyper.log_signal_variance = g;
      }
    }
    const double sg = row_scale * site_scale_grad;
    if (sites.likelihood() == Likelihood::kGaussian)
      est.grad_hyper.log_noise_variance = sg;
    else if (sites.likelihood() == Likelihood::kLaplace)
      est.grad_hyper.log_laplace_scale = sg;
  }
  return est;
}

}  // namespace

StochasticEstimate estimate_elbo_lower_bound(
    const IndexBatch& batch, const BasisExpansion& ex, const MatrixXd& X,
    const SiteProjection& sites, const VectorXd& mu, const ChevronCholesky& C,
    int quad_points, const EstimatorOptions& opts) {
  return elbo_lower_bound_impl(batch, ex, X, sites, mu, ChevronViewT{&C},
                               quad_points, opts);
}

StochasticEstimate estimate_elbo_lower_bound(
    const IndexBatch& batch, const BasisExpansion& ex, const MatrixXd& X,
    const SiteProjection& sites, const VectorXd& mu, const MatrixXd& C,
    int quad_points, const EstimatorOptions& opts) {
  require(C.rows() == C.cols(), "estimate_elbo_lower_bound: C must be square");
  return elbo_lower_bound_impl(batch, ex, X, sites, mu, DenseLowerViewT{&C},
                               quad_points, opts);
}

StochasticEstimate estimate_kl(const IndexBatch& batch,
                               const BasisExpansion& ex, const VectorXd& mu,
                               const ChevronCholesky& C, double log_det_s,
                               const EstimatorOptions& opts) {
  require(mu.size() == ex.m(), "estimate_kl: mu size mismatch");
  require(C.dim() == ex.m(), "estimate_kl: factor size mismatch");
  const auto m = static_cast<double>(ex.m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const double outer = m / mt;
  const double gamma = outer * outer;

  const VectorXd mu_i = gather(mu, batch.i_tilde);
  const VectorXd mu_j = gather(mu, batch.j_tilde);
  const MatrixXd sb = ex.prior_precision_block(batch.j_tilde, batch.i_tilde);
  const ChevronViewT view{&C};
  const MatrixXd ci = gather_factor(view, batch.i_tilde, batch.r_tilde);
  const MatrixXd cj = gather_factor(view, batch.j_tilde, batch.r_tilde);
  const MatrixXd s_ci = sb * ci;
  const MatrixXd st_cj = sb.transpose() * cj;
  const VectorXd s_mu_i = sb * mu_i;
  const VectorXd st_mu_j = sb.transpose() * mu_j;

  double trace_part = 0.0, log_part = 0.0;
  for (Index t = 0; t < batch.m_tilde(); ++t) {
    trace_part += cj.col(t).dot(s_ci.col(t));
    log_part += C.log_diag_param(batch.r_tilde[t]);
  }
  double log_s_term;
  if (ex.has_diagonal_prior()) {
    log_s_term = 0.0;
    for (const Index i : batch.i_tilde) log_s_term += std::log(ex.s_diag(i));
    log_s_term *= outer;
  } else {
    require(std::isfinite(log_det_s),
            "estimate_kl: dense prior needs a log|S| constant");
    log_s_term = log_det_s;
  }

  StochasticEstimate est;
  est.touched = touched_union(batch);
  est.value = 0.5 * (gamma * mu_j.dot(s_mu_i) + outer * gamma * trace_part -
                     2.0 * outer * log_part - m - log_s_term);

  scatter_add(est.grad_mu, batch.i_tilde, (0.5 * gamma * st_mu_j).eval());
  scatter_add(est.grad_mu, batch.j_tilde, (0.5 * gamma * s_mu_i).eval());
  for (Index t = 0; t < batch.m_tilde(); ++t) {
    const Index r = batch.r_tilde[t];
    for (Index b = 0; b < batch.m_tilde(); ++b) {
      if (view.in_pattern(batch.i_tilde[b], r))
        est.grad_C[pack_rc(batch.i_tilde[b], r)] +=
            0.5 * outer * gamma * st_cj(b, t);
      if (view.in_pattern(batch.j_tilde[b], r))
        est.grad_C[pack_rc(batch.j_tilde[b], r)] +=
            0.5 * outer * gamma * s_ci(b, t);
    }
    est.grad_C[pack_rc(r, r)] += -outer / C.diag(r);
  }

  if (opts.log_s_grad) {
    const VectorXd& s = ex.dictionary_s();
    for (Index bj = 0; bj < batch.m_tilde(); ++bj)
      for (Index bi = 0; bi < batch.m_tilde(); ++bi)
        if (batch.j_tilde[bj] == batch.i_tilde[bi]) {
          const Index k = batch.i_tilde[bi];
          double acc = mu[k] * mu[k];
          double cdot = 0.0;
          for (Index t = 0; t < batch.m_tilde(); ++t)
            cdot += cj(bj, t) * ci(bi, t);
          est.grad_log_s[k] += 0.5 * (gamma * acc + outer * gamma * cdot) * s[k];
        }
    for (const Index i : batch.i_tilde) est.grad_log_s[i] += -0.5 * outer;
  }
  return est;
}

HyperGrad estimate_hyper_grads(const IndexBatch& batch,
                               const BasisExpansion& ex, const MatrixXd& X,
                               const VectorXd& y, double sigma_sq,
                               const VectorXd& mu, const ChevronCholesky& C) {
  if (ex.kind() != ExpansionKind::kRffSeArd)
    throw UnsupportedOperation(
        "estimate_hyper_grads: analytic hyperparameter path exists for the "
        "rff_se_ard kind only");
  EstimatorOptions opts;
  opts.hyper_grad = true;
  const auto em = estimate_l_mu(batch, ex, X, y, sigma_sq, mu, opts);
  const auto es = estimate_l_sigma(batch, ex, X, sigma_sq, C, opts);
  const auto ec = estimate_l_const(batch, ex, y, sigma_sq, opts);
  HyperGrad total;
  total.ensure_dim(ex.input_dim());
  total.add_scaled(em.grad_hyper, -0.5);
  total.add_scaled(es.grad_hyper, -0.5);
  total.add_scaled(ec.grad_hyper, -0.5);
  return total;
}

}  // namespace qsgp
