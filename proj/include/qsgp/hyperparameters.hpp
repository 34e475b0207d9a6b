#pragma once

#include <cmath>

#include "qsgp/common.hpp"

namespace qsgp {

// Kernel and likelihood scales, all log-parameterized so the exponentiated
// values are positive by construction.
struct Hyperparameters {
  VectorXd log_lengthscales;        // one ARD lengthscale per input dim
  double log_signal_variance = 0.0; // kernel variance
  double log_noise_variance = 0.0;  // Gaussian likelihood sigma^2
  double log_laplace_scale = 0.0;   // Laplace likelihood b

  Index input_dim() const { return log_lengthscales.size(); }
  double lengthscale(Index k) const { return std::exp(log_lengthscales[k]); }
  double signal_variance() const { return std::exp(log_signal_variance); }
  double noise_variance() const { return std::exp(log_noise_variance); }
  double laplace_scale() const { return std::exp(log_laplace_scale); }

  void validate() const {
    require(log_lengthscales.allFinite(), "non-finite log lengthscale");
    require(std::isfinite(log_signal_variance), "non-finite log signal variance");
    require(std::isfinite(log_noise_variance), "non-finite log noise variance");
    require(std::isfinite(log_laplace_scale), "non-finite log laplace scale");
  }

  static Hyperparameters isotropic(Index d, double lengthscale,
                                   double signal_variance,
                                   double noise_variance,
                                   double laplace_scale = 1.0) {
    require(d >= 1, "input dim must be >= 1");
    require(lengthscale > 0 && signal_variance > 0 && noise_variance > 0 &&
                laplace_scale > 0,
            "scales must be positive");
    Hyperparameters h;
    h.log_lengthscales = VectorXd::Constant(d, std::log(lengthscale));
    h.log_signal_variance = std::log(signal_variance);
    h.log_noise_variance = std::log(noise_variance);
    h.log_laplace_scale = std::log(laplace_scale);
    return h;
  }
};

}  // namespace qsgp
