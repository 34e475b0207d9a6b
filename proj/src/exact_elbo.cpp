#include "qsgp/exact_elbo.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "qsgp/gauss_hermite.hpp"

namespace qsgp {

namespace {

// log|A| for SPD A via Cholesky; throws NumericError when not SPD.
double spd_log_det(const MatrixXd& A, const char* what) {
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw NumericError(what);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

ExactElboTerms exact_elbo(const MatrixXd& Phi, const MatrixXd& S,
                          const VectorXd& y, double sigma_sq,
                          const VectorXd& mu, const MatrixXd& C) {
  const Index n = Phi.rows();
  const Index m = Phi.cols();
  require(S.rows() == m && S.cols() == m, "exact_elbo: S shape");
  require(y.size() == n, "exact_elbo: y size");
  require(mu.size() == m, "exact_elbo: mu size");
  require(C.rows() == m && C.cols() == m, "exact_elbo: C shape");
  require(sigma_sq > 0, "exact_elbo: sigma_sq must be positive");
  for (Index r = 0; r < m; ++r)
    if (!(C(r, r) > 0))
      throw InvalidState("exact_elbo: C diagonal must be positive");

  const MatrixXd Cl = C.triangularView<Eigen::Lower>();
  const MatrixXd Sigma = Cl * Cl.transpose();
  const double log_det_sigma =
      2.0 * Cl.diagonal().array().log().sum();
  const double log_det_s = spd_log_det(S, "exact_elbo: S is not SPD");

  ExactElboTerms t;
  const VectorXd phimu = Phi * mu;
  t.l_mu = (-2.0 * y.dot(phimu) + phimu.squaredNorm()) / sigma_sq +
           mu.dot(S * mu);
  t.l_sigma = (Phi * Cl).squaredNorm() / sigma_sq + (S * Sigma).trace() -
              log_det_sigma;
  t.l_const = -log_det_s - static_cast<double>(m) +
              static_cast<double>(n) *
                  std::log(2.0 * std::numbers::pi * sigma_sq) +
              y.squaredNorm() / sigma_sq;
  t.elbo = -0.5 * (t.l_mu + t.l_sigma + t.l_const);
  return t;
}

std::pair<VectorXd, MatrixXd> exact_posterior(const MatrixXd& Phi,
                                              const MatrixXd& S,
                                              const VectorXd& y,
                                              double sigma_sq) {
  require(sigma_sq > 0, "exact_posterior: sigma_sq must be positive");
  require(Phi.rows() == y.size(), "exact_posterior: y size");
  const MatrixXd A = Phi.transpose() * Phi / sigma_sq + S;
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw NumericError("exact_posterior: singular system");
  MatrixXd sigma_post = llt.solve(MatrixXd::Identity(A.rows(), A.cols()));
  sigma_post = 0.5 * (sigma_post + sigma_post.transpose()).eval();
  VectorXd mu_post = llt.solve(Phi.transpose() * y / sigma_sq);
  return {std::move(mu_post), std::move(sigma_post)};
}

double exact_log_marginal(const MatrixXd& Phi, const MatrixXd& S,
                          const VectorXd& y, double sigma_sq) {
  const Index n = Phi.rows();
  Eigen::LLT<MatrixXd> s_llt(S);
  if (s_llt.info() != Eigen::Success)
    throw NumericError("exact_log_marginal: S is not SPD");
  const MatrixXd cov =
      Phi * s_llt.solve(Phi.transpose()) +
      sigma_sq * MatrixXd::Identity(n, n);
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("exact_log_marginal: covariance is not SPD");
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const VectorXd alpha = llt.solve(y);
  return -0.5 * (y.dot(alpha) + log_det +
                 static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

double expected_log_lik_1d(const SiteProjection& site, Index row, double a,
                           double v, int quad_points) {
  require(quad_points >= 1, "expected_log_lik_1d: quad_points must be >= 1");
  if (v == 0.0) return site.log_g(row, a);
  const GaussHermite& rule = GaussHermite::get(quad_points);
  double acc = 0.0;
  for (Index q = 0; q < rule.nodes.size(); ++q)
    acc += rule.weights[q] * site.log_g(row, a + rule.nodes[q] * v);
  return acc;
}

double exact_expected_log_lik(const SiteProjection& site, const MatrixXd& Phi,
                              const VectorXd& mu, const MatrixXd& Sigma,
                              int quad_points) {
  require(Phi.rows() == site.size(), "exact_expected_log_lik: row mismatch");
  double total = 0.0;
  for (Index l = 0; l < Phi.rows(); ++l) {
    const double a = Phi.row(l).dot(mu);
    const double v = Phi.row(l) * Sigma * Phi.row(l).transpose();
    total += expected_log_lik_1d(site, l, a, v, quad_points);
  }
  return total;
}

}  // namespace qsgp
