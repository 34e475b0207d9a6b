#pragma once

#include <optional>
#include <vector>

#include "qsgp/common.hpp"
#include "qsgp/features.hpp"
#include "qsgp/optimizer.hpp"
#include "qsgp/sites.hpp"

namespace qsgp {

struct PredictiveResult {
  double mean = 0.0;
  double variance = 0.0;  // >= 0 by construction (|C' phi|^2)
  std::optional<double> augmented_variance;  // >= variance when present
};

// Latent predictive moments: mean = phi(x)' mu, variance = |C' phi(x)|^2
// (+ sigma^2 when include_noise), evaluated with the chevron structure in
// O(m k + m).
PredictiveResult predict(const VariationalState& state,
                         const BasisExpansion& ex, const VectorXd& x,
                         bool include_noise, double sigma_sq = 0.0);

// Augmented predictive variance for inducing-point expansions: one radial
// basis added at the test point, assuming no posterior correlation with the
// existing bases:
//   k(x)' Sigma k(x) + s2 k(x,x)^2 / (k(x)'k(x) + s2 k(x,x)).
// Far from the data this reverts to the prior variance; it never falls
// below the plain latent variance.
PredictiveResult predict_augmented(const VariationalState& state,
                                   const BasisExpansion& ex, const VectorXd& x,
                                   double sigma_sq);

// P(y = +1 | x) under the logistic likelihood, by Gauss-Hermite quadrature
// over the latent predictive Gaussian. Always in (0, 1).
double logistic_probability(double latent_mean, double latent_variance,
                            int quad_points);

struct EvalMetrics {
  double rmse = 0.0;
  double mnlp = 0.0;
  double accuracy = 0.0;
  bool has_accuracy = false;
};

// RMSE over predictive means (regression), MNLP of the targets under the
// predictive distribution (response scale; the likelihood scale enters the
// density), and sign accuracy through the predictive median for the
// logistic likelihood.
EvalMetrics evaluate(const std::vector<PredictiveResult>& predictions,
                     const VectorXd& targets, Likelihood likelihood,
                     double scale, int quad_points = 101);

}  // namespace qsgp
