#pragma once

#include "qsgp/common.hpp"

namespace qsgp {

enum class Likelihood { kGaussian, kLaplace, kLogistic };

// Per-datapoint scalar log-likelihood factors log g_l(u), u being the
// projected latent value at row l. All three kinds are log-concave in u.
//
//   gaussian:  -log(2 pi s2)/2 - (y_l - u)^2 / (2 s2)
//   laplace:   -log(2 b) - |y_l - u| / b
//   logistic:  -log(1 + exp(-y_l u)),  y_l in {-1, +1}
class SiteProjection {
 public:
  // scale is sigma^2 for the Gaussian kind, b for Laplace, unused for
  // logistic.
  SiteProjection(Likelihood likelihood, VectorXd targets, double scale = 1.0);

  Likelihood likelihood() const { return likelihood_; }
  Index size() const { return y_.size(); }
  const VectorXd& targets() const { return y_; }
  double scale() const { return scale_; }

  double log_g(Index row, double u) const;
  double dlog_g_du(Index row, double u) const;
  // d log g / d log(scale); zero for logistic.
  double dlog_g_dlog_scale(Index row, double u) const;

  void set_scale(double scale) {
    require(scale > 0 && std::isfinite(scale), "site scale must be positive");
    scale_ = scale;
  }

 private:
  Likelihood likelihood_;
  VectorXd y_;
  double scale_;
};

const char* likelihood_name(Likelihood lik);
Likelihood likelihood_from_name(const std::string& name);

}  // namespace qsgp
