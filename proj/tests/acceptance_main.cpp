// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are fixed here, not calibrated at run time.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "qsgp/artifact.hpp"
#include "qsgp/cli.hpp"
#include "qsgp/control_variates.hpp"
#include "qsgp/dataset.hpp"
#include "qsgp/estimators.hpp"
#include "qsgp/exact_elbo.hpp"
#include "qsgp/optimizer.hpp"
#include "qsgp/predictor.hpp"

using namespace qsgp;
using oracles::MeanAccumulator;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::vector<Index> iota_idx(Index count) {
  std::vector<Index> v(count);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Instance {
  BasisExpansion ex;
  MatrixXd X, Phi, S;
  VectorXd y, mu;
  ChevronCholesky C;
  double sigma_sq;
};

Instance make_instance(Index n, Index m, Index k, std::uint64_t seed,
                       double sigma_sq = 0.5) {
  const Index d = 2;
  auto hyper = Hyperparameters::isotropic(d, 1.0, 1.2, sigma_sq);
  Instance inst{BasisExpansion::rff_se_ard(m, d, seed, hyper),
                MatrixXd(n, d),
                MatrixXd(),
                MatrixXd(),
                VectorXd(n),
                VectorXd(m),
                ChevronCholesky(m, k),
                sigma_sq};
  CounterRng rng(rng_key(seed, 940));
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) inst.X(i, c) = rng.next_normal();
  for (Index i = 0; i < n; ++i) inst.y[i] = rng.next_normal();
  for (Index j = 0; j < m; ++j) inst.mu[j] = 0.6 * rng.next_normal();
  for (Index col = 0; col < m; ++col) {
    inst.C.set_param(col, col, 0.3 * rng.next_normal() - 0.5);
    if (col < k)
      for (Index row = col + 1; row < m; ++row)
        inst.C.set_param(row, col, 0.25 * rng.next_normal());
  }
  inst.Phi = inst.ex.feature_block(inst.X, iota_idx(n), iota_idx(m));
  inst.S = inst.ex.prior_precision_block(iota_idx(m), iota_idx(m));
  return inst;
}

long resident_kb() {
  std::ifstream statm("/proc/self/statm");
  long pages = 0, resident = 0;
  statm >> pages >> resident;
  return resident * (sysconf(_SC_PAGESIZE) / 1024);
}

// --- criterion 1: estimator unbiasedness ----------------------------------

Outcome criterion_unbiasedness() {
  auto inst = make_instance(20, 8, 3, 101);
  const auto exact =
      exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu,
                 inst.C.to_dense());
  MeanAccumulator wm, ws, wc;
  for (std::uint64_t t = 0; t < 200000; ++t) {
    auto batch = sample_batch({11, t}, 20, 8, 3, 4);
    wm.add(estimate_l_mu(batch, inst.ex, inst.X, inst.y, inst.sigma_sq,
                         inst.mu)
               .value);
    ws.add(estimate_l_sigma(batch, inst.ex, inst.X, inst.sigma_sq, inst.C)
               .value);
    wc.add(estimate_l_const(batch, inst.ex, inst.y, inst.sigma_sq).value);
  }
  const double zm = wm.z_score(exact.l_mu);
  const double zs = ws.z_score(exact.l_sigma);
  const double zc = wc.z_score(exact.l_const);
  Outcome out;
  out.pass = std::abs(zm) <= 4.0 && std::abs(zs) <= 4.0 && std::abs(zc) <= 4.0;
  out.detail = "z(mean)=" + fmt(zm) + " z(cov)=" + fmt(zs) +
               " z(const)=" + fmt(zc) + " over 2e5 batches";
  return out;
}

// --- criterion 2: gradient correctness -------------------------------------

Outcome criterion_gradients() {
  const Index n = 10, m = 6, d = 2, k = 2;
  auto inst = make_instance(n, m, k, 102);
  auto full = sample_batch({0, 0}, n, m, m, n, false, true);
  auto est_mu_full =
      estimate_l_mu(full, inst.ex, inst.X, inst.y, inst.sigma_sq, inst.mu);
  auto est_sig_full =
      estimate_l_sigma(full, inst.ex, inst.X, inst.sigma_sq, inst.C);
  auto hyper_full = estimate_hyper_grads(full, inst.ex, inst.X, inst.y,
                                         inst.sigma_sq, inst.mu, inst.C);
  const MatrixXd dense_c = inst.C.to_dense();

  double worst_rel = 0.0;
  auto rel_check = [&worst_rel](double an, double fd) {
    const double rel = std::abs(fd) > 1e-8
                           ? std::abs(an - fd) / std::abs(fd)
                           : std::abs(an - fd);
    worst_rel = std::max(worst_rel, rel);
  };

  // mu gradient against finite differences of the exact mean term
  for (Index j = 0; j < m; ++j) {
    auto f = [&](double delta) {
      VectorXd mu = inst.mu;
      mu[j] += delta;
      return exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, mu, dense_c)
          .l_mu;
    };
    rel_check(est_mu_full.grad_mu.at(j), oracles::central_diff(f, 0.0, 1e-5));
  }
  // factor gradient against finite differences of the exact covariance term
  for (Index col = 0; col < m; ++col)
    for (Index row = col; row < m; ++row) {
      if (!inst.C.in_pattern(row, col)) continue;
      auto f = [&](double delta) {
        MatrixXd c2 = dense_c;
        c2(row, col) += delta;
        return exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu,
                          c2)
            .l_sigma;
      };
      rel_check(est_sig_full.grad_C.at(pack_rc(row, col)),
                oracles::central_diff(f, 0.0, 1e-5));
    }
  // hyperparameter path against finite differences of the exact bound
  auto elbo_at = [&](int which, double delta) {
    Hyperparameters h = inst.ex.hyper();
    double s2 = inst.sigma_sq;
    if (which < d)
      h.log_lengthscales[which] += delta;
    else if (which == d)
      h.log_signal_variance += delta;
    else
      s2 = std::exp(std::log(s2) + delta);
    auto ex2 = inst.ex.with_hyper(h);
    MatrixXd phi = ex2.feature_block(inst.X, iota_idx(n), iota_idx(m));
    MatrixXd s_mat = ex2.prior_precision_block(iota_idx(m), iota_idx(m));
    return exact_elbo(phi, s_mat, inst.y, s2, inst.mu, dense_c).elbo;
  };
  for (int which = 0; which < d + 2; ++which) {
    auto f = [&](double delta) { return elbo_at(which, delta); };
    const double fd = oracles::central_diff(f, 0.0, 1e-5);
    const double an = which < d ? hyper_full.log_lengthscales[which]
                      : which == d ? hyper_full.log_signal_variance
                                   : hyper_full.log_noise_variance;
    rel_check(an, fd);
  }

  // stochastic gradient means against the exact gradients
  std::vector<MeanAccumulator> gm(static_cast<std::size_t>(m));
  std::vector<std::pair<std::uint64_t, MeanAccumulator>> gc;
  for (Index col = 0; col < m; ++col)
    for (Index row = col; row < m; ++row)
      if (inst.C.in_pattern(row, col)) gc.push_back({pack_rc(row, col), {}});
  for (std::uint64_t t = 0; t < 150000; ++t) {
    auto batch = sample_batch({13, t}, n, m, 2, 3);
    auto em = estimate_l_mu(batch, inst.ex, inst.X, inst.y, inst.sigma_sq,
                            inst.mu);
    auto es = estimate_l_sigma(batch, inst.ex, inst.X, inst.sigma_sq, inst.C);
    for (Index j = 0; j < m; ++j) {
      auto it = em.grad_mu.find(j);
      gm[static_cast<std::size_t>(j)].add(it == em.grad_mu.end() ? 0.0
                                                                 : it->second);
    }
    for (auto& [key, acc] : gc) {
      auto it = es.grad_C.find(key);
      acc.add(it == es.grad_C.end() ? 0.0 : it->second);
    }
  }
  double worst_z = 0.0;
  for (Index j = 0; j < m; ++j)
    worst_z = std::max(worst_z, std::abs(gm[static_cast<std::size_t>(j)]
                                             .z_score(est_mu_full.grad_mu.at(j))));
  for (auto& [key, acc] : gc)
    worst_z =
        std::max(worst_z, std::abs(acc.z_score(est_sig_full.grad_C.at(key))));

  Outcome out;
  out.pass = worst_rel <= 1e-4 && worst_z <= 4.0;
  out.detail = "worst FD rel err=" + fmt(worst_rel) +
               ", worst stochastic-mean z=" + fmt(worst_z);
  return out;
}

// --- criterion 3: closed-form diagonal -------------------------------------

Outcome criterion_closed_form() {
  CounterRng rng(rng_key(3, 941));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double phi_sq = 5.0 * rng.next_unit();
    const double sigma_sq = 0.1 + 2.0 * rng.next_unit();
    const double s_rr = 0.1 + 3.0 * rng.next_unit();
    auto objective = [&](long double c) {
      return (static_cast<long double>(phi_sq) / sigma_sq + s_rr) * c * c -
             2.0L * std::log(c);
    };
    const double by_search = static_cast<double>(
        oracles::golden_section_min<long double>(objective, 1e-6L, 50.0L,
                                                 1e-15L));
    worst = std::max(worst, std::abs(closed_form_crr(phi_sq, sigma_sq, s_rr) -
                                     by_search));
  }
  return {worst <= 1e-8, "worst |closed form - search| = " + fmt(worst) +
                             " over 100 inputs"};
}

// --- criterion 4: running-vector recurrence ---------------------------------

Outcome criterion_recurrence() {
  const Index n = 100, m = 40, n_bar = 20;
  auto hyper = Hyperparameters::isotropic(2, 1.0, 1.0, 0.4);
  auto ex = BasisExpansion::rff_se_ard(m, 2, 7, hyper);
  CounterRng rng(rng_key(4, 942));
  MatrixXd X(n, 2);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 2; ++c) X(i, c) = rng.next_normal();
  VectorXd mu = VectorXd::Zero(m);
  auto cv = ControlVariateState::create(ex, X, n_bar, 3, mu, nullptr, {});
  for (int step = 0; step < 500; ++step) {
    const Index count = 1 + rng.next_below(6);
    std::vector<Index> touched;
    std::vector<double> olds, news;
    for (Index t = 0; t < count; ++t) {
      const Index k = rng.next_below(m);
      touched.push_back(k);
      olds.push_back(mu[k]);
      mu[k] += rng.next_normal();
      news.push_back(mu[k]);
    }
    cv.update_mu(X, touched, olds, news);
  }
  const VectorXd direct =
      ex.feature_block(X, cv.support_rows(), iota_idx(m)) * mu;
  const double err = (cv.a_mu() - direct).cwiseAbs().maxCoeff();
  return {err <= 1e-9,
          "max |recurrence - direct| = " + fmt(err) + " after 500 updates"};
}

// --- criterion 5: control-variate contract ----------------------------------

Outcome criterion_control_variate() {
  const Index n = 2000, m = 500, mt = 50, nt = 50;
  const double sigma_sq = 0.4;
  auto hyper = Hyperparameters::isotropic(2, 1.0, 1.0, sigma_sq);
  auto ex = BasisExpansion::rff_se_ard(m, 2, 19, hyper);
  CounterRng rng(rng_key(5, 943));
  MatrixXd X(n, 2);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 2; ++c) X(i, c) = rng.next_normal();
  VectorXd mu(m);
  for (Index j = 0; j < m; ++j) mu[j] = rng.next_normal();  // prior-ish draw

  const double beta = static_cast<double>(n) * m * m /
                      (sigma_sq * nt * mt * mt);
  auto quad_term = [&](const IndexBatch& batch) {
    MatrixXd phi_i = ex.feature_block(X, batch.l_tilde, batch.i_tilde);
    MatrixXd phi_j = ex.feature_block(X, batch.l_tilde, batch.j_tilde);
    return beta * (phi_j * gather(mu, batch.j_tilde))
                      .dot(phi_i * gather(mu, batch.i_tilde));
  };

  const Index reps = 3000;
  std::vector<Index> ranks{0, 50, 200, 500};
  std::vector<double> variances;
  double corr_mean_z = 0.0;
  for (const Index n_bar : ranks) {
    std::optional<ControlVariateState> cv;
    if (n_bar > 0)
      cv = ControlVariateState::create(ex, X, n_bar, 23, mu, nullptr, {});
    MeanAccumulator w, corr_only;
    for (std::uint64_t t = 0; t < static_cast<std::uint64_t>(reps); ++t) {
      auto batch = sample_batch({29, t}, n, m, mt, nt);  // shared draws
      double v = quad_term(batch);
      if (cv) {
        const double c =
            cv_quadratic_correction(batch, *cv, X, sigma_sq, n, mu, 0).value;
        v += c;
        corr_only.add(c);
      }
      w.add(v);
    }
    variances.push_back(w.variance());
    if (n_bar == 500) corr_mean_z = corr_only.z_score(0.0);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < variances.size(); ++i)
    if (variances[i] > variances[i - 1] * 1.02) monotone = false;
  const double ratio = variances.back() / variances.front();
  Outcome out;
  out.pass = std::abs(corr_mean_z) <= 4.0 && monotone && ratio <= 0.5;
  out.detail = "correction z=" + fmt(corr_mean_z) +
               ", var ratio(500 vs 0)=" + fmt(ratio) +
               (monotone ? ", monotone in rank" : ", NOT monotone");
  return out;
}

// --- criterion 6: bound direction and collapse ------------------------------

Outcome criterion_bound_direction() {
  const Index n = 12, m = 8;
  auto inst = make_instance(n, m, 2, 106);
  VectorXd labels(n);
  for (Index l = 0; l < n; ++l) labels[l] = inst.y[l] > 0 ? 1.0 : -1.0;
  const MatrixXd dense = inst.C.to_dense();
  const MatrixXd sigma = dense * dense.transpose();

  Outcome out;
  std::string detail;
  for (auto lik : {Likelihood::kLogistic, Likelihood::kLaplace}) {
    SiteProjection sites(lik, lik == Likelihood::kLogistic ? labels : inst.y,
                         0.7);
    const double exact =
        exact_expected_log_lik(sites, inst.Phi, inst.mu, sigma, 101);

    // one-sided direction at m~ = 2
    MeanAccumulator w;
    for (std::uint64_t t = 0; t < 100000; ++t) {
      auto batch = sample_batch({31, t}, n, m, 2, 3);
      w.add(estimate_elbo_lower_bound(batch, inst.ex, inst.X, sites, inst.mu,
                                      inst.C, 101)
                .value);
    }
    if (w.mean() > exact + 3.0 * w.std_error()) out.pass = false;

    // exact collapse in enumeration mode
    auto full = sample_batch({0, 0}, n, m, m, n, false, true);
    const double collapsed =
        estimate_elbo_lower_bound(full, inst.ex, inst.X, sites, inst.mu,
                                  inst.C, 101)
            .value;
    if (std::abs(collapsed - exact) > 1e-10) out.pass = false;

    // bias non-increasing over m~ in {1, m/4, m/2, m}
    std::vector<Index> mts{1, 2, 4, 8};
    std::vector<double> gap, se;
    for (const Index mt : mts) {
      MeanAccumulator acc;
      const bool full_mode = mt == m;
      const std::uint64_t reps = full_mode ? 50 : 30000;
      for (std::uint64_t t = 0; t < reps; ++t) {
        auto batch = sample_batch({37, t}, n, m, mt, n, false, full_mode);
        acc.add(estimate_elbo_lower_bound(batch, inst.ex, inst.X, sites,
                                          inst.mu, inst.C, 101)
                    .value);
      }
      gap.push_back(exact - acc.mean());
      se.push_back(acc.std_error());
    }
    for (std::size_t i = 1; i < gap.size(); ++i)
      if (gap[i] > gap[i - 1] + 3.0 * (se[i] + se[i - 1])) out.pass = false;
    if (std::abs(gap.back()) > 1e-10) out.pass = false;

    detail += std::string(likelihood_name(lik)) + ": one-sided z=" +
              fmt(w.z_score(exact)) + " gaps(m~=1,2,4,8)=" + fmt(gap[0]) +
              "," + fmt(gap[1]) + "," + fmt(gap[2]) + "," + fmt(gap[3]) +
              "  ";
  }
  out.detail = detail;
  return out;
}

// --- criterion 7: conjugate convergence -------------------------------------

Outcome criterion_conjugate_convergence() {
  const Index n = 40, m = 10;
  auto hyper = Hyperparameters::isotropic(2, 1.0, 1.0, 0.1);
  auto ex = BasisExpansion::rff_se_ard(m, 2, 17, hyper);
  CounterRng rng(rng_key(7, 944));
  MatrixXd X(n, 2);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 2; ++c) X(i, c) = rng.next_normal();
  VectorXd y(n);
  for (Index i = 0; i < n; ++i)
    y[i] = std::sin(X(i, 0)) + 0.3 * rng.next_normal();

  TrainConfig config;
  config.m_tilde = m;
  config.n_tilde = n;
  config.n_bar = 0;
  config.chevron_k = m;
  config.iterations = 5000;
  config.log_every = 1000;
  config.enumerate_batches = true;
  config.lr_variational = 0.5;
  config.lr_decay_total = 3.0;
  auto result = train(ex, X, y, config);

  const MatrixXd phi = ex.feature_block(X, iota_idx(n), iota_idx(m));
  const MatrixXd s_mat = ex.prior_precision_block(iota_idx(m), iota_idx(m));
  auto [mu_star, sigma_star] = exact_posterior(phi, s_mat, y, 0.1);
  const double mu_err = (result.state.mu - mu_star).cwiseAbs().maxCoeff();
  const double lml = exact_log_marginal(phi, s_mat, y, 0.1);
  const double elbo =
      exact_elbo(phi, s_mat, y, 0.1, result.state.mu,
                 result.state.C.to_dense())
          .elbo;
  Outcome out;
  out.pass = !result.interrupted && mu_err <= 1e-3 &&
             std::abs(elbo - lml) <= 1e-3;
  out.detail = "|mu - mu*|_inf=" + fmt(mu_err) +
               ", |elbo - log marginal|=" + fmt(std::abs(elbo - lml));
  return out;
}

// --- criterion 8: per-iteration O(1) ----------------------------------------

Outcome criterion_constant_cost() {
  const Index n = 2048, d = 3;
  CounterRng rng(rng_key(8, 945));
  MatrixXd X(n, d);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) X(i, c) = rng.next_normal();
    y[i] = rng.next_normal();
  }
  auto hyper = Hyperparameters::isotropic(d, 1.0, 1.0, 0.2);

  const long rss_before = resident_kb();
  auto median_step_ms = [&](Index m) {
    auto ex = BasisExpansion::rff_se_ard(m, d, 3, hyper);
    TrainConfig config;
    config.m_tilde = 256;
    config.n_tilde = 128;
    config.n_bar = 0;
    config.chevron_k = 4;
    config.iterations = 40;
    config.log_every = 1;
    config.init_rows = 64;
    Trainer trainer(ex, X, y, config);
    std::vector<double> times;
    for (Index t = 0; t < config.iterations; ++t)
      times.push_back(trainer.step(t).step_wall_ms);
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  };
  const double small = median_step_ms(10000);
  const double large = median_step_ms(1000000);
  const long rss_growth_mb = (resident_kb() - rss_before) / 1024;

  Outcome out;
  // a full feature matrix at m = 1e6 would need n*m*8 bytes = 16 GB; the
  // streaming path must stay within a small multiple of the O(m) state
  out.pass = large <= 2.0 * small && rss_growth_mb < 512;
  out.detail = "median step ms: m=1e4 -> " + fmt(small) + ", m=1e6 -> " +
               fmt(large) + " (ratio " + fmt(large / small) +
               "), rss growth " + std::to_string(rss_growth_mb) + " MB";
  return out;
}

// --- criterion 9: augmentation ----------------------------------------------

Outcome criterion_augmentation() {
  auto data = make_sinc_dataset(500, 0.1, 31);
  const double sigma_sq = 0.1, signal = 1.0;
  auto hyper = Hyperparameters::isotropic(1, 0.35, signal, sigma_sq);
  auto ex = BasisExpansion::inducing_point(data.X, hyper);
  TrainConfig config;
  config.m_tilde = 64;
  config.n_tilde = 64;
  config.n_bar = 0;
  config.chevron_k = 10;
  config.iterations = 1500;
  config.log_every = 500;
  auto result = train(ex, data.X, data.y, config);

  bool ordered = true;
  for (Index t = 0; t < 200; ++t) {
    const double raw = -10.0 + 0.1 * static_cast<double>(t);
    VectorXd x(1);
    x << data.standardizer.apply_x(VectorXd::Constant(1, raw));
    auto r = predict_augmented(result.state, ex, x, sigma_sq);
    if (!(r.augmented_variance.value() >= r.variance)) ordered = false;
  }
  VectorXd far(1);
  far << data.standardizer.apply_x(VectorXd::Constant(1, 10.0));
  auto r_far = predict_augmented(result.state, ex, far, sigma_sq);
  const double far_err = std::abs(*r_far.augmented_variance - signal);

  Outcome out;
  out.pass = ordered && far_err <= 1e-3 && !result.interrupted;
  out.detail = std::string(ordered ? "ordered on grid" : "ORDER VIOLATION") +
               ", |aug var(10) - prior|=" + fmt(far_err);
  return out;
}

// --- criterion 10: relevance-vector sparsity --------------------------------

Outcome criterion_rvm_sparsity() {
  auto data = make_sinc_dataset(500, 0.1, 11);
  auto hyper = Hyperparameters::isotropic(1, 0.35, 1.0, 0.1);
  auto ex = BasisExpansion::explicit_dictionary(data.X, VectorXd::Ones(500),
                                                hyper);
  TrainConfig config;
  config.rvm = true;
  config.m_tilde = 125;
  config.n_tilde = 100;
  config.n_bar = 250;
  config.chevron_k = 10;
  config.iterations = 60000;
  config.log_every = 10000;
  config.seed = 4;
  config.diag_refresh = 10;
  config.lr_decay_total = 3.0;
  config.lr_rvm = 8.0;
  config.lr_variational = 0.2;
  auto result = train(ex, data.X, data.y, config);
  auto pruned = rvm_prune(*result.rvm, result.state, ex);
  Outcome out;
  out.pass = !result.interrupted && !pruned.empty_model &&
             static_cast<Index>(pruned.kept.size()) <= 50;
  out.detail = std::to_string(pruned.kept.size()) +
               " of 500 relevance vectors kept";
  return out;
}

// --- criterion 11: classification sanity ------------------------------------

Outcome criterion_classification() {
  auto data = make_two_blob_dataset(400, 6.0, 3);
  auto hyper = Hyperparameters::isotropic(2, 1.0, 1.0, 1.0);
  auto ex = BasisExpansion::rff_se_ard(512, 2, 7, hyper);
  TrainConfig config;
  config.likelihood = Likelihood::kLogistic;
  config.m_tilde = 64;
  config.n_tilde = 32;
  config.n_bar = 0;
  config.chevron_k = 0;
  config.iterations = 3000;
  config.quad_points = 101;
  config.log_every = 1000;
  auto result = train(ex, data.X, data.y, config);

  Index correct = 0;
  std::vector<PredictiveResult> preds;
  for (Index i = 0; i < data.n(); ++i) {
    auto r = predict(result.state, ex, data.X.row(i), false);
    preds.push_back(r);
    if ((r.mean >= 0 ? 1.0 : -1.0) == data.y[i]) ++correct;
  }
  const double acc =
      static_cast<double>(correct) / static_cast<double>(data.n());
  auto metrics = evaluate(preds, data.y, Likelihood::kLogistic, 1.0, 101);
  Outcome out;
  out.pass = !result.interrupted && acc >= 0.95;
  out.detail = "training accuracy=" + fmt(acc) + ", mnlp=" + fmt(metrics.mnlp);
  return out;
}

// --- criterion 12: reproducibility ------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// the step wall-time column is metrology, not computation; it is the one
// metrics column excluded from the bit comparison
std::string strip_wall_column(const std::string& text) {
  std::stringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    out += line.substr(0, line.rfind(','));
    out += '\n';
  }
  return out;
}

Outcome criterion_reproducibility() {
  TrainOptions topt;
  topt.demo = "sinc";
  topt.kernel = "rff";
  topt.m = 64;
  topt.m_tilde = 16;
  topt.n_tilde = 32;
  topt.n_bar = 32;
  topt.chevron_cols = 3;
  topt.iters = 500;
  topt.log_every = 100;
  topt.seed = 99;
  topt.lengthscale = 0.5;
  topt.noise_variance = 0.1;
  topt.out = "acc_model_a.qsgp";
  topt.metrics = "acc_metrics_a.csv";
  std::ostringstream log;
  bool ok = cmd_train(topt, log) == kExitOk;
  TrainOptions t2 = topt;
  t2.out = "acc_model_b.qsgp";
  t2.metrics = "acc_metrics_b.csv";
  ok = ok && cmd_train(t2, log) == kExitOk;

  const bool artifacts_equal = slurp(topt.out) == slurp(t2.out);
  const bool metrics_equal = strip_wall_column(slurp(topt.metrics)) ==
                             strip_wall_column(slurp(t2.metrics));

  // save/load round trip preserves predictions bit-exactly
  bool preds_equal = true;
  {
    auto art = ModelArtifact::load(topt.out);
    auto ex = art.expansion();
    auto state = art.variational_state();
    auto art2 = ModelArtifact::load(topt.out);
    auto ex2 = art2.expansion();
    auto state2 = art2.variational_state();
    auto data = make_sinc_dataset(50, 0.1, 1);
    for (Index i = 0; i < data.n(); ++i) {
      auto a = predict(state, ex, data.X.row(i), true,
                       art.hyper.noise_variance());
      auto b = predict(state2, ex2, data.X.row(i), true,
                       art2.hyper.noise_variance());
      if (a.mean != b.mean || a.variance != b.variance) preds_equal = false;
    }
  }
  for (const char* f : {"acc_model_a.qsgp", "acc_model_b.qsgp",
                        "acc_metrics_a.csv", "acc_metrics_b.csv"})
    std::remove(f);

  Outcome out;
  out.pass = ok && artifacts_equal && metrics_equal && preds_equal;
  out.detail = std::string("artifacts ") +
               (artifacts_equal ? "identical" : "DIFFER") + ", metrics " +
               (metrics_equal ? "identical" : "DIFFER") + ", predictions " +
               (preds_equal ? "identical" : "DIFFER");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"estimator unbiasedness", criterion_unbiasedness},
      {"gradient correctness", criterion_gradients},
      {"closed-form diagonal", criterion_closed_form},
      {"running-vector recurrence", criterion_recurrence},
      {"control-variate contract", criterion_control_variate},
      {"bound direction and collapse", criterion_bound_direction},
      {"conjugate convergence", criterion_conjugate_convergence},
      {"constant per-iteration cost", criterion_constant_cost},
      {"augmented predictive variance", criterion_augmentation},
      {"relevance-vector sparsity", criterion_rvm_sparsity},
      {"classification sanity", criterion_classification},
      {"reproducibility", criterion_reproducibility},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %2zu: %-32s (%.1fs) %s\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
