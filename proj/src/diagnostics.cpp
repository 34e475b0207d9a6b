#include "qsgp/diagnostics.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "qsgp/control_variates.hpp"
#include "qsgp/estimators.hpp"
#include "qsgp/exact_elbo.hpp"

namespace qsgp {

namespace {

struct Welford {
  long long count = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
  double std_error() const {
    return std::sqrt(variance() / static_cast<double>(count));
  }
};

std::vector<Index> iota_idx(Index count) {
  std::vector<Index> v(count);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

DiagRow summarize(const std::string& term, const Welford& acc, double oracle) {
  const double se = acc.std_error();
  return {term, acc.mean, se, oracle,
          se > 0 ? (acc.mean - oracle) / se : 0.0};
}

}  // namespace

std::vector<DiagRow> run_diagnostics(Index replicates, std::uint64_t seed) {
  require(replicates >= 1, "diagnose: replicates must be >= 1");

  // fixed synthetic conjugate instance, n=20, m=8, m~=3, n~=4
  const Index n = 20, m = 8, d = 2, mt = 3, nt = 4;
  const double sigma_sq = 0.5;
  auto hyper = Hyperparameters::isotropic(d, 1.0, 1.2, sigma_sq);
  auto ex = BasisExpansion::rff_se_ard(m, d, seed + 1, hyper);
  CounterRng rng(rng_key(seed, 930));
  MatrixXd X(n, d);
  VectorXd y(n), mu(m);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) X(i, k) = rng.next_normal();
  for (Index i = 0; i < n; ++i) y[i] = rng.next_normal();
  for (Index j = 0; j < m; ++j) mu[j] = 0.6 * rng.next_normal();
  ChevronCholesky C(m, 3);
  for (Index col = 0; col < m; ++col) {
    C.set_param(col, col, -0.5 + 0.3 * rng.next_normal());
    if (col < 3)
      for (Index row = col + 1; row < m; ++row)
        C.set_param(row, col, 0.25 * rng.next_normal());
  }

  const auto rows = iota_idx(n);
  const auto cols = iota_idx(m);
  const MatrixXd phi = ex.feature_block(X, rows, cols);
  const MatrixXd s_mat = ex.prior_precision_block(cols, cols);
  const MatrixXd dense_c = C.to_dense();
  const auto exact = exact_elbo(phi, s_mat, y, sigma_sq, mu, dense_c);

  std::vector<DiagRow> report;

  // value unbiasedness for the three conjugate estimators
  {
    Welford wm, ws, wc;
    for (Index t = 0; t < replicates; ++t) {
      auto batch = sample_batch({seed, static_cast<std::uint64_t>(t)}, n, m,
                                mt, nt);
      wm.add(estimate_l_mu(batch, ex, X, y, sigma_sq, mu).value);
      ws.add(estimate_l_sigma(batch, ex, X, sigma_sq, C).value);
      wc.add(estimate_l_const(batch, ex, y, sigma_sq).value);
    }
    report.push_back(summarize("mean_term_value", wm, exact.l_mu));
    report.push_back(summarize("cov_term_value", ws, exact.l_sigma));
    report.push_back(summarize("const_term_value", wc, exact.l_const));
  }

  // gradient means against the exact gradients (worst coordinate)
  {
    const VectorXd exact_grad_mu =
        (2.0 / sigma_sq) * (phi.transpose() * (phi * mu) -
                            phi.transpose() * y) +
        2.0 * s_mat * mu;
    std::vector<Welford> gm(static_cast<std::size_t>(m));
    for (Index t = 0; t < replicates; ++t) {
      auto batch = sample_batch({seed + 7, static_cast<std::uint64_t>(t)}, n,
                                m, mt, nt);
      auto est = estimate_l_mu(batch, ex, X, y, sigma_sq, mu);
      for (Index k = 0; k < m; ++k) {
        auto it = est.grad_mu.find(k);
        gm[static_cast<std::size_t>(k)].add(
            it == est.grad_mu.end() ? 0.0 : it->second);
      }
    }
    DiagRow worst;
    for (Index k = 0; k < m; ++k) {
      DiagRow row = summarize("mean_term_grad", gm[static_cast<std::size_t>(k)],
                              exact_grad_mu[k]);
      if (std::abs(row.z) >= std::abs(worst.z)) worst = row;
    }
    report.push_back(worst);
  }

  // one-sided bound direction of the site-projection estimator
  {
    VectorXd labels(n);
    for (Index i = 0; i < n; ++i) labels[i] = y[i] > 0 ? 1.0 : -1.0;
    SiteProjection sites(Likelihood::kLogistic, labels);
    const MatrixXd sigma = dense_c * dense_c.transpose();
    const double exact_ll = exact_expected_log_lik(sites, phi, mu, sigma, 61);
    Welford w;
    for (Index t = 0; t < replicates; ++t) {
      auto batch = sample_batch({seed + 11, static_cast<std::uint64_t>(t)}, n,
                                m, mt, nt);
      w.add(estimate_elbo_lower_bound(batch, ex, X, sites, mu, C, 61).value);
    }
    DiagRow row = summarize("site_bound_direction", w, exact_ll);
    // only an upward violation is a failure; keep the signed slack visible
    row.z = std::max(0.0, row.z);
    report.push_back(row);
  }

  // control variate: zero mean and the variance rank sweep
  {
    const Index big_n = 200, big_m = 32;
    auto ex2 = BasisExpansion::rff_se_ard(big_m, d, seed + 2, hyper);
    MatrixXd X2(big_n, d);
    VectorXd mu2(big_m);
    for (Index i = 0; i < big_n; ++i)
      for (Index k = 0; k < d; ++k) X2(i, k) = rng.next_normal();
    for (Index j = 0; j < big_m; ++j) mu2[j] = rng.next_normal();

    auto cv = ControlVariateState::create(ex2, X2, 50, seed + 3, mu2, nullptr,
                                          {});
    Welford zero_mean;
    for (Index t = 0; t < replicates; ++t) {
      auto batch = sample_batch({seed + 13, static_cast<std::uint64_t>(t)},
                                big_n, big_m, 4, 6);
      zero_mean.add(
          cv_quadratic_correction(batch, cv, X2, sigma_sq, big_n, mu2, 0)
              .value);
    }
    report.push_back(summarize("cv_correction_mean", zero_mean, 0.0));

    const double beta = static_cast<double>(big_n) * big_m * big_m /
                        (sigma_sq * 6.0 * 4.0 * 4.0);
    const Index sweep_reps = std::min<Index>(replicates, 4000);
    double var0 = 0.0;
    for (const Index n_bar : {Index{0}, Index{25}, Index{100}, Index{200}}) {
      std::optional<ControlVariateState> sweep_cv;
      if (n_bar > 0)
        sweep_cv = ControlVariateState::create(ex2, X2, n_bar, seed + 3, mu2,
                                               nullptr, {});
      Welford w;
      for (Index t = 0; t < sweep_reps; ++t) {
        auto batch = sample_batch({seed + 17, static_cast<std::uint64_t>(t)},
                                  big_n, big_m, 4, 6);
        MatrixXd phi_i = ex2.feature_block(X2, batch.l_tilde, batch.i_tilde);
        MatrixXd phi_j = ex2.feature_block(X2, batch.l_tilde, batch.j_tilde);
        double v = beta * (phi_j * gather(mu2, batch.j_tilde))
                              .dot(phi_i * gather(mu2, batch.i_tilde));
        if (sweep_cv)
          v += cv_quadratic_correction(batch, *sweep_cv, X2, sigma_sq, big_n,
                                       mu2, 0)
                   .value;
        w.add(v);
      }
      if (n_bar == 0) var0 = w.variance();
      report.push_back({"cv_variance_nbar_" + std::to_string(n_bar),
                        w.variance(), 0.0, var0, 0.0});
    }
  }
  return report;
}

}  // namespace qsgp
