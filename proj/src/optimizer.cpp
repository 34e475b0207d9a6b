#include "qsgp/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>

namespace qsgp {

namespace {

constexpr double kAdaGradEps = 1e-8;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kLogSClamp = 30.0;  // |log s| bound for precision learning
constexpr Index kColumnChunk = 4096;

// Column squared norms phi_r'phi_r, estimated by row subsampling (scaled by
// n / n_used) when n exceeds max_rows.
VectorXd column_sq_norms(const BasisExpansion& ex, const MatrixXd& X,
                         Index max_rows, std::uint64_t seed) {
  const Index n = X.rows();
  std::vector<Index> rows;
  double scale = 1.0;
  if (n <= max_rows) {
    rows.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  } else {
    CounterRng rng(rng_key(seed, kStreamInit));
    rows.resize(static_cast<std::size_t>(max_rows));
    for (Index i = 0; i < max_rows; ++i)
      rows[static_cast<std::size_t>(i)] = rng.next_below(n);
    scale = static_cast<double>(n) / static_cast<double>(max_rows);
  }
  VectorXd norms(ex.m());
  for (Index start = 0; start < ex.m(); start += kColumnChunk) {
    const Index stop = std::min(ex.m(), start + kColumnChunk);
    std::vector<Index> cols(static_cast<std::size_t>(stop - start));
    for (Index c = start; c < stop; ++c)
      cols[static_cast<std::size_t>(c - start)] = c;
    const MatrixXd block = ex.feature_block(X, rows, cols);
    norms.segment(start, stop - start) =
        scale * block.colwise().squaredNorm().transpose();
  }
  return norms;
}

void merge_scaled(std::unordered_map<Index, double>& into,
                  const std::unordered_map<Index, double>& from, double w) {
  for (const auto& [k, v] : from) into[k] += w * v;
}

void merge_scaled_rc(std::unordered_map<std::uint64_t, double>& into,
                     const std::unordered_map<std::uint64_t, double>& from,
                     double w) {
  for (const auto& [k, v] : from) into[k] += w * v;
}

template <class Map, class Key>
double scale_of(Map& map, Key key) {
  auto it = map.find(key);
  return it == map.end() ? 1.0 : it->second;
}

}  // namespace

void TrainConfig::validate(Index n, Index m) const {
  require(m_tilde >= 1 && m_tilde <= m, "config: need 1 <= m_tilde <= m");
  require(n_tilde >= 1 && n_tilde <= n, "config: need 1 <= n_tilde <= n");
  require(n_bar >= 0 && n_bar <= n, "config: need 0 <= n_bar <= n");
  require(chevron_k >= 0 && chevron_k <= m, "config: need 0 <= chevron_k <= m");
  require(iterations >= 0, "config: iterations must be >= 0");
  require(lr_variational > 0 && lr_hyper > 0 && lr_rvm > 0,
          "config: learning rates > 0");
  require(lr_decay_total >= 1.0, "config: decay factor must be >= 1");
  require(effective_freeze() >= 0 && effective_freeze() <= iterations,
          "config: need 0 <= hyper_freeze_iters <= iterations");
  require(quad_points >= 0, "config: quad_points must be >= 0");
  require(log_every >= 1, "config: log_every must be >= 1");
  require(init_rows >= 1, "config: init_rows must be >= 1");
  if (enumerate_batches)
    require(m_tilde == m && n_tilde == n,
            "config: enumeration needs m_tilde == m and n_tilde == n");
  if (rvm)
    require(likelihood == Likelihood::kGaussian,
            "config: precision learning is defined for the conjugate path");
}

double closed_form_crr(double phi_sq_norm, double sigma_sq, double s_rr) {
  require(std::isfinite(phi_sq_norm) && phi_sq_norm >= 0,
          "closed_form_crr: phi norm must be finite and >= 0");
  require(sigma_sq > 0, "closed_form_crr: sigma_sq must be positive");
  const double denom = phi_sq_norm + sigma_sq * s_rr;
  require(denom > 0, "closed_form_crr: undefined optimum");
  return std::sqrt(sigma_sq / denom);
}

VariationalState init_state(const BasisExpansion& ex, const MatrixXd& X,
                            const TrainConfig& config) {
  VariationalState state(ex.m(), config.chevron_k);
  const VectorXd norms = column_sq_norms(ex, X, config.init_rows, config.seed);
  const double sigma_sq = ex.hyper().noise_variance();
  for (Index r = 0; r < ex.m(); ++r)
    state.C.set_entry(r, r, closed_form_crr(norms[r], sigma_sq, ex.s_diag(r)));
  return state;
}

PrunedModel rvm_prune(const RvmState& rvm, const VariationalState& state,
                      const BasisExpansion& ex) {
  require(ex.kind() == ExpansionKind::kExplicitDictionary,
          "rvm_prune: needs a dictionary expansion");
  require(rvm.log_s.size() == ex.m(), "rvm_prune: log_s size mismatch");
  const double log_threshold = std::log(rvm.prune_threshold);
  PrunedModel out;
  for (Index i = 0; i < ex.m(); ++i)
    if (rvm.log_s[i] < log_threshold) out.kept.push_back(i);
  if (out.kept.empty()) {
    out.empty_model = true;
    return out;
  }
  const auto mk = static_cast<Index>(out.kept.size());
  Index new_k = 0;
  for (const Index i : out.kept)
    if (i < state.C.dense_cols()) ++new_k;
  out.mu = VectorXd(mk);
  out.log_s = VectorXd(mk);
  out.C.emplace(mk, new_k);
  MatrixXd centers(mk, ex.input_dim());
  VectorXd s(mk);
  for (Index a = 0; a < mk; ++a) {
    const Index i = out.kept[static_cast<std::size_t>(a)];
    out.mu[a] = state.mu[i];
    out.log_s[a] = rvm.log_s[i];
    s[a] = std::exp(rvm.log_s[i]);
    centers.row(a) = ex.centers().row(i);
    for (Index b = 0; b <= a; ++b) {
      const Index j = out.kept[static_cast<std::size_t>(b)];
      if (out.C->in_pattern(a, b)) {
        const double v = state.C.entry(i, j);
        if (a == b)
          out.C->set_entry(a, b, v);
        else
          out.C->set_param(a, b, v);
      }
    }
  }
  out.expansion = BasisExpansion::explicit_dictionary(centers, s, ex.hyper());
  return out;
}

Trainer::Trainer(BasisExpansion ex, MatrixXd X, VectorXd y, TrainConfig config)
    : ex_base_(ex),
      ex_current_(std::move(ex)),
      X_(std::move(X)),
      y_(std::move(y)),
      config_(std::move(config)),
      hyper_(ex_current_.hyper()),
      state_(ex_current_.m(), config_.chevron_k) {
  require(X_.rows() == y_.size(), "trainer: X/y size mismatch");
  require(X_.rows() >= 1, "trainer: empty dataset");
  config_.validate(X_.rows(), ex_current_.m());
  state_ = init_state(ex_current_, X_, config_);

  if (config_.rvm) {
    require(ex_current_.kind() == ExpansionKind::kExplicitDictionary,
            "trainer: precision learning needs a dictionary expansion");
    RvmState rvm;
    rvm.log_s = ex_current_.dictionary_s().array().log();
    rvm.prune_threshold = config_.rvm_prune_threshold;
    rvm_ = std::move(rvm);
  }

  if (config_.likelihood != Likelihood::kGaussian) {
    const double scale = config_.likelihood == Likelihood::kLaplace
                             ? hyper_.laplace_scale()
                             : 1.0;
    sites_.emplace(config_.likelihood, y_, scale);
  }

  if (config_.n_bar > 0) {
    for (Index r = 0; r < config_.chevron_k; ++r) tracked_cols_.push_back(r);
    cv_ = ControlVariateState::create(
        ex_base_, X_, config_.n_bar, config_.seed, state_.mu, &state_.C,
        tracked_cols_,
        ex_base_.kind() == ExpansionKind::kInducingPoint, state_.version);
  }
  if (config_.use_linear_cv)
    linear_cv_ = LinearCvState::create(ex_base_, X_, y_, state_.mu,
                                       state_.version);

  // L_const is a constant while the prior and sigma^2 are fixed; cache it
  // exactly. For dense priors log|S| is computed once at a feasible size,
  // otherwise the reported constant is dropped (gradients are unaffected).
  if (ex_current_.has_diagonal_prior()) {
    double log_det_s = 0.0;
    for (Index i = 0; i < ex_current_.m(); ++i)
      log_det_s += std::log(ex_current_.s_diag(i));
    log_det_s_ = log_det_s;
  } else if (ex_current_.m() <= 4096) {
    std::vector<Index> all(static_cast<std::size_t>(ex_current_.m()));
    for (Index i = 0; i < ex_current_.m(); ++i)
      all[static_cast<std::size_t>(i)] = i;
    const MatrixXd s_mat = ex_current_.prior_precision_block(all, all);
    Eigen::LLT<MatrixXd> llt(s_mat);
    if (llt.info() != Eigen::Success)
      throw NumericError("trainer: prior precision is not SPD");
    log_det_s_ =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  } else {
    log_det_s_ = 0.0;  // dropped constant for very large dense priors
  }
  if (!config_.learn_hyper && !config_.rvm) {
    const auto n = static_cast<double>(X_.rows());
    const auto md = static_cast<double>(ex_current_.m());
    const double s2 = hyper_.noise_variance();
    const_l_const_ = -log_det_s_ - md +
                     n * std::log(2.0 * std::numbers::pi * s2) +
                     y_.squaredNorm() / s2;
    has_const_l_const_ = true;
  }

  const Index hyper_dim = hyper_.input_dim() + 3;
  adam_m_ = VectorXd::Zero(hyper_dim);
  adam_v_ = VectorXd::Zero(hyper_dim);
}

double Trainer::lr_at(double base, Index t) const {
  if (config_.iterations <= 1) return base;
  const double frac =
      static_cast<double>(t) / static_cast<double>(config_.iterations);
  return base * std::exp(-std::log(config_.lr_decay_total) * frac);
}

Trainer::StepGrads Trainer::assemble_gaussian(const IndexBatch& batch,
                                              MetricsRow& row) {
  const double sigma_sq = hyper_.noise_variance();
  const bool want_hyper =
      config_.learn_hyper &&
      static_cast<Index>(batch.key.iteration) >= config_.effective_freeze();
  EstimatorOptions opts;
  opts.hyper_grad = want_hyper;
  opts.log_s_grad = config_.rvm;

  auto est_mu = estimate_l_mu(batch, ex_current_, X_, y_, sigma_sq, state_.mu,
                              opts);
  auto est_sigma =
      estimate_l_sigma(batch, ex_current_, X_, sigma_sq, state_.C, opts);

  double l_const_val;
  StochasticEstimate est_const;
  const bool stochastic_const = config_.learn_hyper || config_.rvm;
  if (stochastic_const) {
    est_const = estimate_l_const(batch, ex_current_, y_, sigma_sq, opts);
    l_const_val = est_const.value;
  } else {
    l_const_val = has_const_l_const_
                      ? const_l_const_
                      : std::numeric_limits<double>::quiet_NaN();
  }

  StepGrads grads;
  grads.has_hyper = want_hyper;
  if (want_hyper) {
    grads.hyper.ensure_dim(hyper_.input_dim());
    grads.hyper.add_scaled(est_mu.grad_hyper, 0.5);
    grads.hyper.add_scaled(est_sigma.grad_hyper, 0.5);
    if (stochastic_const) grads.hyper.add_scaled(est_const.grad_hyper, 0.5);
  }
  merge_scaled(grads.mu, est_mu.grad_mu, 0.5);
  merge_scaled_rc(grads.c_slots, est_sigma.grad_C, 0.5);
  if (config_.rvm) {
    merge_scaled(grads.log_s, est_mu.grad_log_s, 0.5);
    merge_scaled(grads.log_s, est_sigma.grad_log_s, 0.5);
    merge_scaled(grads.log_s, est_const.grad_log_s, 0.5);
  }

  double l_mu_val = est_mu.value;
  double l_sigma_val = est_sigma.value;
  const Index n = X_.rows();
  if (cv_) {
    const bool nystrom = cv_->has_whitened_prior();
    const CvBatchBlocks blocks = cv_->batch_blocks(batch, X_);
    auto corr = cv_quadratic_correction(batch, *cv_, X_, sigma_sq, n,
                                        state_.mu, state_.version, &blocks);
    l_mu_val += corr.value;
    merge_scaled(grads.mu, corr.grad, 0.5);
    if (nystrom) {
      auto nc = cv_nystrom_correction(batch, *cv_, state_.mu, state_.version);
      l_mu_val += nc.value;
      merge_scaled(grads.mu, nc.grad, 0.5);
    }
    // per sampled dense column, weighted like its term in the estimator
    const double outer = static_cast<double>(ex_current_.m()) /
                         static_cast<double>(batch.m_tilde());
    std::unordered_map<Index, Index> r_mult;
    for (const Index r : batch.r_tilde)
      if (cv_->tracks_col(r)) ++r_mult[r];
    std::vector<Index> rs;
    for (const auto& [r, cnt] : r_mult) rs.push_back(r);
    std::sort(rs.begin(), rs.end());
    for (const Index r : rs) {
      const double w = outer * static_cast<double>(r_mult[r]);
      auto cc = cv_quadratic_correction(batch, *cv_, X_, sigma_sq, n, state_.C,
                                        r, state_.version, &blocks);
      l_sigma_val += w * cc.value;
      for (const auto& [row_idx, g] : cc.grad)
        grads.c_slots[pack_rc(row_idx, r)] += 0.5 * w * g;
      if (nystrom) {
        auto ncc = cv_nystrom_correction(batch, *cv_, state_.C, r,
                                         state_.version);
        l_sigma_val += w * ncc.value;
        for (const auto& [row_idx, g] : ncc.grad)
          grads.c_slots[pack_rc(row_idx, r)] += 0.5 * w * g;
      }
    }
  }
  if (linear_cv_) {
    auto lc = cv_linear_correction(batch, *linear_cv_, sigma_sq, state_.mu,
                                   state_.version);
    l_mu_val += lc.value;
    merge_scaled(grads.mu, lc.grad, 0.5);
  }

  row.l_mu_est = l_mu_val;
  row.l_sigma_est = l_sigma_val;
  row.l_const_est = l_const_val;
  row.elbo_estimate = -0.5 * (l_mu_val + l_sigma_val + l_const_val);
  return grads;
}

Trainer::StepGrads Trainer::assemble_site_bound(const IndexBatch& batch,
                                                MetricsRow& row) {
  const bool want_hyper =
      config_.learn_hyper &&
      static_cast<Index>(batch.key.iteration) >= config_.effective_freeze();
  EstimatorOptions ll_opts;
  ll_opts.hyper_grad = want_hyper;
  EstimatorOptions kl_opts;
  kl_opts.log_s_grad = config_.rvm;

  auto est_ll =
      estimate_elbo_lower_bound(batch, ex_current_, X_, *sites_, state_.mu,
                                state_.C, config_.quad_points, ll_opts);
  auto est_kl = estimate_kl(batch, ex_current_, state_.mu, state_.C,
                            log_det_s_, kl_opts);

  StepGrads grads;
  grads.has_hyper = want_hyper;
  if (want_hyper) {
    grads.hyper.ensure_dim(hyper_.input_dim());
    grads.hyper.add_scaled(est_ll.grad_hyper, -1.0);
  }
  merge_scaled(grads.mu, est_ll.grad_mu, -1.0);
  merge_scaled(grads.mu, est_kl.grad_mu, 1.0);
  merge_scaled_rc(grads.c_slots, est_ll.grad_C, -1.0);
  merge_scaled_rc(grads.c_slots, est_kl.grad_C, 1.0);
  if (config_.rvm) merge_scaled(grads.log_s, est_kl.grad_log_s, 1.0);

  row.l_mu_est = est_ll.value;   // likelihood lower bound
  row.l_sigma_est = est_kl.value;  // divergence estimate
  row.l_const_est = 0.0;
  row.elbo_estimate = est_ll.value - est_kl.value;
  return grads;
}

bool Trainer::grads_finite(const StepGrads& grads) {
  bool ok = true;
  for (const auto& [k, g] : grads.mu)
    if (!std::isfinite(g)) {
      scale_mu_[k] = 0.5 * scale_of(scale_mu_, k);
      ok = false;
    }
  for (const auto& [k, g] : grads.c_slots)
    if (!std::isfinite(g)) {
      scale_c_[k] = 0.5 * scale_of(scale_c_, k);
      ok = false;
    }
  for (const auto& [k, g] : grads.log_s)
    if (!std::isfinite(g)) {
      scale_log_s_[k] = 0.5 * scale_of(scale_log_s_, k);
      ok = false;
    }
  if (grads.has_hyper) {
    if (!grads.hyper.log_lengthscales.allFinite() ||
        !std::isfinite(grads.hyper.log_signal_variance) ||
        !std::isfinite(grads.hyper.log_noise_variance) ||
        !std::isfinite(grads.hyper.log_laplace_scale)) {
      scale_hyper_ *= 0.5;
      ok = false;
    }
  }
  return ok;
}

void Trainer::apply_updates(const StepGrads& grads, Index t) {
  const double lr_v = lr_at(config_.lr_variational, t);

  // mean updates (sorted for run-to-run determinism of float accumulation)
  std::vector<Index> mu_idx;
  mu_idx.reserve(grads.mu.size());
  for (const auto& [k, g] : grads.mu) mu_idx.push_back(k);
  std::sort(mu_idx.begin(), mu_idx.end());
  std::vector<double> mu_old(mu_idx.size()), mu_new(mu_idx.size());
  for (std::size_t a = 0; a < mu_idx.size(); ++a) {
    const Index k = mu_idx[a];
    const double g = grads.mu.at(k);
    double& acc = acc_mu_[k];
    acc += g * g;
    mu_old[a] = state_.mu[k];
    state_.mu[k] -=
        lr_v * scale_of(scale_mu_, k) * g / (std::sqrt(acc) + kAdaGradEps);
    mu_new[a] = state_.mu[k];
  }

  // factor updates; diagonal slots are trained in log space
  std::vector<std::uint64_t> c_keys;
  c_keys.reserve(grads.c_slots.size());
  for (const auto& [k, g] : grads.c_slots) c_keys.push_back(k);
  std::sort(c_keys.begin(), c_keys.end());
  std::map<Index, std::vector<std::pair<Index, std::pair<double, double>>>>
      col_changes;  // col -> (row, (old entry, new entry))
  for (const std::uint64_t key : c_keys) {
    const auto [row_idx, col] = unpack_rc(key);
    const double g_entry = grads.c_slots.at(key);
    const bool is_diag = row_idx == col;
    const double old_entry = state_.C.entry(row_idx, col);
    const double g_param = is_diag ? g_entry * old_entry : g_entry;
    double& acc = acc_c_[key];
    acc += g_param * g_param;
    const double delta = -lr_v * scale_of(scale_c_, key) * g_param /
                         (std::sqrt(acc) + kAdaGradEps);
    state_.C.set_param(row_idx, col, state_.C.param(row_idx, col) + delta);
    const double new_entry = state_.C.entry(row_idx, col);
    if (cv_ && cv_->tracks_col(col))
      col_changes[col].push_back({row_idx, {old_entry, new_entry}});
  }

  // precision updates: per-coordinate normalized steps in log space with a
  // moving second moment (no first-moment averaging), advanced only when a
  // coordinate is sampled, and a clamp that keeps exp(log_s) representable.
  // The gradient noise is what breaks the symmetric all-bases-alike regime,
  // so it must pass through un-averaged; the moving second moment keeps
  // late precision growth from stalling on early gradient history the way
  // a cumulative accumulator does.
  if (rvm_ && !grads.log_s.empty()) {
    const double lr_s = config_.lr_rvm;
    std::vector<Index> s_idx;
    s_idx.reserve(grads.log_s.size());
    for (const auto& [k, g] : grads.log_s) s_idx.push_back(k);
    std::sort(s_idx.begin(), s_idx.end());
    for (const Index k : s_idx) {
      const double g = grads.log_s.at(k);
      LazyAdam& st = adam_log_s_[k];
      ++st.t;
      st.v = kAdamBeta2 * st.v + (1.0 - kAdamBeta2) * g * g;
      const double vhat = st.v / (1.0 - std::pow(kAdamBeta2, st.t));
      double value = rvm_->log_s[k] - lr_s * scale_of(scale_log_s_, k) * g /
                                          (std::sqrt(vhat) + kAdamEps);
      value = std::clamp(value, -kLogSClamp, kLogSClamp);
      rvm_->log_s[k] = value;
      ex_current_.set_dictionary_s(k, std::exp(value));
    }
  }

  // hyperparameter step (Adam), active only after the freeze window
  if (grads.has_hyper) {
    const double lr_h = lr_at(config_.lr_hyper, t);
    const Index d = hyper_.input_dim();
    VectorXd g(d + 3);
    g.head(d) = grads.hyper.log_lengthscales;
    g[d] = grads.hyper.log_signal_variance;
    g[d + 1] = grads.hyper.log_noise_variance;
    g[d + 2] = grads.hyper.log_laplace_scale;
    ++adam_t_;
    adam_m_ = kAdamBeta1 * adam_m_ + (1.0 - kAdamBeta1) * g;
    adam_v_ =
        kAdamBeta2 * adam_v_.array() + (1.0 - kAdamBeta2) * g.array().square();
    const double bc1 = 1.0 - std::pow(kAdamBeta1, adam_t_);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, adam_t_);
    const VectorXd step =
        scale_hyper_ * lr_h * (adam_m_ / bc1).array() /
        ((adam_v_ / bc2).array().sqrt() + kAdamEps);
    hyper_.log_lengthscales -= step.head(d);
    hyper_.log_signal_variance -= step[d];
    hyper_.log_noise_variance -= step[d + 1];
    hyper_.log_laplace_scale -= step[d + 2];
    ex_current_ = ex_current_.with_hyper(hyper_);
    cached_col_norms_.reset();
    if (sites_ && sites_->likelihood() == Likelihood::kLaplace)
      sites_->set_scale(hyper_.laplace_scale());
  }

  ++state_.version;
  if (cv_) {
    cv_->update_mu(X_, mu_idx, mu_old, mu_new);
    for (const auto& [col, changes] : col_changes) {
      std::vector<Index> rows;
      std::vector<double> olds, news;
      for (const auto& [row_idx, vals] : changes) {
        rows.push_back(row_idx);
        olds.push_back(vals.first);
        news.push_back(vals.second);
      }
      cv_->update_col(X_, col, rows, olds, news);
    }
    cv_->mark_synced(state_.version);
  }
  if (linear_cv_) {
    linear_cv_->update(mu_idx, mu_old, mu_new);
    linear_cv_->mark_synced(state_.version);
  }
}

void Trainer::refresh_diagonal() {
  // feature columns are static unless the hyperparameters move
  if (!cached_col_norms_)
    cached_col_norms_ =
        column_sq_norms(ex_current_, X_, config_.init_rows, config_.seed);
  const VectorXd& norms = *cached_col_norms_;
  const double sigma_sq = hyper_.noise_variance();
  for (Index r = state_.C.dense_cols(); r < state_.C.dim(); ++r) {
    const double crr = closed_form_crr(norms[r], sigma_sq,
                                       ex_current_.s_diag(r));
    state_.C.set_entry(r, r, crr);
  }
  ++state_.version;
  if (cv_) cv_->mark_synced(state_.version);  // diagonal tail is not tracked
  if (linear_cv_) linear_cv_->mark_synced(state_.version);
}

MetricsRow Trainer::step(Index t) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool need_z =
      config_.likelihood != Likelihood::kGaussian && config_.quad_points == 0;
  const IndexBatch batch = sample_batch(
      {config_.seed, static_cast<std::uint64_t>(t)}, X_.rows(),
      ex_current_.m(), config_.m_tilde, config_.n_tilde, need_z,
      config_.enumerate_batches);

  MetricsRow row;
  row.iteration = t;
  StepGrads grads = config_.likelihood == Likelihood::kGaussian
                        ? assemble_gaussian(batch, row)
                        : assemble_site_bound(batch, row);
  if (grads_finite(grads)) {
    apply_updates(grads, t);
  } else {
    ++rejected_;
  }
  if (config_.diag_refresh > 0 && t > 0 && t % config_.diag_refresh == 0)
    refresh_diagonal();

  row.lr_v = lr_at(config_.lr_variational, t);
  row.lr_h = lr_at(config_.lr_hyper, t);
  row.step_wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return row;
}

TrainResult Trainer::run() {
  TrainResult result{state_, hyper_, rvm_, {}, 0, false, {}};
  for (Index t = 0; t < config_.iterations; ++t) {
    try {
      MetricsRow row = step(t);
      if (t % config_.log_every == 0 || t == config_.iterations - 1)
        result.metrics.push_back(row);
    } catch (const std::exception& e) {
      result.interrupted = true;
      result.error = e.what();
      break;
    }
  }
  result.state = state_;
  result.hyper = hyper_;
  result.rvm = rvm_;
  result.rejected_steps = rejected_;
  return result;
}

TrainResult train(const BasisExpansion& ex, const MatrixXd& X,
                  const VectorXd& y, const TrainConfig& config) {
  Trainer trainer(ex, X, y, config);
  return trainer.run();
}

}  // namespace qsgp
