#pragma once

#include <unordered_map>
#include <vector>

#include "qsgp/batch.hpp"
#include "qsgp/chevron.hpp"
#include "qsgp/common.hpp"
#include "qsgp/features.hpp"
#include "qsgp/sites.hpp"

namespace qsgp {

// Dense gradient with respect to the log-hyperparameters.
struct HyperGrad {
  VectorXd log_lengthscales;  // empty until used
  double log_signal_variance = 0.0;
  double log_noise_variance = 0.0;
  double log_laplace_scale = 0.0;

  void ensure_dim(Index d) {
    if (log_lengthscales.size() != d) log_lengthscales = VectorXd::Zero(d);
  }
  HyperGrad& add_scaled(const HyperGrad& other, double w);
};

struct EstimatorOptions {
  bool hyper_grad = false;  // fill grad_hyper (features: rff kind only)
  bool log_s_grad = false;  // fill grad_log_s (dictionary kind only)
};

// Value plus closed-form sparse gradients of one stochastic term. Gradient
// entries exist only for sampled (touched) coordinates; repeated indices
// contribute with multiplicity.
struct StochasticEstimate {
  double value = 0.0;
  std::unordered_map<Index, double> grad_mu;
  std::unordered_map<std::uint64_t, double> grad_C;  // key = pack_rc(row, col)
  std::unordered_map<Index, double> grad_log_s;
  HyperGrad grad_hyper;
  bool has_hyper_grad = false;
  std::vector<Index> touched;  // distinct i~ U j~, ascending
};

// Unbiased estimator of L_mu:
//   -(2 n m)/(s2 n~ m~) y_l~' Phi_{l~,i~} mu_i~
//   + (n m^2)/(s2 n~ m~^2) mu_j~' Phi_{l~,j~}' Phi_{l~,i~} mu_i~
//   + (m/m~)^2 mu_j~' S_{j~,i~} mu_i~
// Cost O(n~ m~ + m~^2).
StochasticEstimate estimate_l_mu(const IndexBatch& batch,
                                 const BasisExpansion& ex, const MatrixXd& X,
                                 const VectorXd& y, double sigma_sq,
                                 const VectorXd& mu,
                                 const EstimatorOptions& opts = {});

// Unbiased estimator of L_Sigma:
//   (m/m~) sum_{r in r~} [ (n m^2)/(s2 n~ m~^2) c_{j~,r}' Phi_{l~,j~}' Phi_{l~,i~} c_{i~,r}
//                          + (m/m~)^2 c_{j~,r}' S_{j~,i~} c_{i~,r}
//                          - 2 log c_rr ].
// Cost O(n~ m~^2 + m~^3).
StochasticEstimate estimate_l_sigma(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const MatrixXd& X, double sigma_sq,
                                    const ChevronCholesky& C,
                                    const EstimatorOptions& opts = {});
// Dense lower-triangular overload (tests and diagnostics); throws
// InvalidState when a sampled diagonal entry is not positive.
StochasticEstimate estimate_l_sigma(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const MatrixXd& X, double sigma_sq,
                                    const MatrixXd& C,
                                    const EstimatorOptions& opts = {});

// Unbiased estimator of L_const for diagonal S:
//   -(m/m~) sum_{i in i~} log s_ii - m + n log(2 pi s2) + n/(s2 n~) y_l~' y_l~.
StochasticEstimate estimate_l_const(const IndexBatch& batch,
                                    const BasisExpansion& ex,
                                    const VectorXd& y, double sigma_sq,
                                    const EstimatorOptions& opts = {});

// Stochastic lower bound of the expected log-likelihood for log-concave
// sites:
//   (n/n~) sum_{l in l~} E_z[ log g_l( (m/m~)   phi_{l,i~} mu_i~
//                                    + (m/m~)^3 z phi_{l,j~} C_{j~,r~} C_{i~,r~}' phi_{l,i~}' ) ]
// The z-expectation is evaluated by Gauss-Hermite quadrature with
// quad_points nodes shared across rows; quad_points == 0 uses the single
// z sample carried by the batch (diagnostic mode). One (i~, j~, r~) draw is
// shared across all rows and nodes.
StochasticEstimate estimate_elbo_lower_bound(
    const IndexBatch& batch, const BasisExpansion& ex, const MatrixXd& X,
    const SiteProjection& sites, const VectorXd& mu, const ChevronCholesky& C,
    int quad_points, const EstimatorOptions& opts = {});
StochasticEstimate estimate_elbo_lower_bound(
    const IndexBatch& batch, const BasisExpansion& ex, const MatrixXd& X,
    const SiteProjection& sites, const VectorXd& mu, const MatrixXd& C,
    int quad_points, const EstimatorOptions& opts = {});

// Stochastic estimate of KL(q || prior) assembled from the S-dependent
// pieces of the L_mu / L_Sigma estimators:
//   0.5 [ mu'S mu + tr(S Sigma) - log|Sigma| - m - log|S| ].
// For diagonal priors log|S| is estimated as (m/m~) sum_{i in i~} log s_ii;
// otherwise the caller supplies the constant log_det_s.
StochasticEstimate estimate_kl(const IndexBatch& batch,
                               const BasisExpansion& ex, const VectorXd& mu,
                               const ChevronCholesky& C,
                               double log_det_s = 0.0,
                               const EstimatorOptions& opts = {});

// Gradient of the stochastic ELBO estimate -(l_mu + l_sigma + l_const)/2
// with respect to the log-hyperparameters, chaining the analytic feature
// gradients through the three estimators. rff_se_ard kind only.
HyperGrad estimate_hyper_grads(const IndexBatch& batch,
                               const BasisExpansion& ex, const MatrixXd& X,
                               const VectorXd& y, double sigma_sq,
                               const VectorXd& mu, const ChevronCholesky& C);

}  // namespace qsgp
