#pragma once

#include <utility>

#include "qsgp/common.hpp"
#include "qsgp/sites.hpp"

namespace qsgp {

// Dense reference implementation of every bound quantity for the conjugate
// weight-space model. This is the oracle the stochastic estimators are
// certified against; it is allowed to cost O(n m^2 + m^3).
struct ExactElboTerms {
  double l_mu = 0;     // (1/s2)(-2 y'Phi mu + |Phi mu|^2) + mu'S mu
  double l_sigma = 0;  // (1/s2) sum((Phi C)^2) + tr(S Sigma) - log|Sigma|
  double l_const = 0;  // log|2 pi S^-1| - m log(2 pi) - m + n log(2 pi s2) + y'y/s2
  double elbo = 0;     // -(l_mu + l_sigma + l_const)/2
};

// C must be lower triangular with positive diagonal, S symmetric positive
// definite.
ExactElboTerms exact_elbo(const MatrixXd& Phi, const MatrixXd& S,
                          const VectorXd& y, double sigma_sq,
                          const VectorXd& mu, const MatrixXd& C);

// Closed-form conjugate posterior: Sigma* = (Phi'Phi/s2 + S)^-1,
// mu* = Sigma* Phi' y / s2.
std::pair<VectorXd, MatrixXd> exact_posterior(const MatrixXd& Phi,
                                              const MatrixXd& S,
                                              const VectorXd& y,
                                              double sigma_sq);

// log N(y | 0, Phi S^-1 Phi' + s2 I); the bound is tight at the exact
// posterior, where it equals this value.
double exact_log_marginal(const MatrixXd& Phi, const MatrixXd& S,
                          const VectorXd& y, double sigma_sq);

// Gauss-Hermite approximation of E_{z~N(0,1)}[log g_row(a + z v)] where
// a = phi mu and v = phi Sigma phi' for the row. The z coefficient is the
// projected variance, not its square root; the stochastic lower-bound
// estimator is consistent with this same convention.
double expected_log_lik_1d(const SiteProjection& site, Index row, double a,
                           double v, int quad_points);

// Sum of expected_log_lik_1d over all rows with a_l = phi_l mu and
// v_l = phi_l Sigma phi_l'.
double exact_expected_log_lik(const SiteProjection& site, const MatrixXd& Phi,
                              const VectorXd& mu, const MatrixXd& Sigma,
                              int quad_points);

}  // namespace qsgp
