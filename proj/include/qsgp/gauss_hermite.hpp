#pragma once

#include "qsgp/common.hpp"

namespace qsgp {

// Gauss-Hermite rule in probabilists' convention:
//   E_{z ~ N(0,1)}[f(z)] ~= sum_i weights[i] * f(nodes[i]),
// weights sum to 1. Exact for polynomials of degree <= 2n-1.
struct GaussHermite {
  VectorXd nodes;
  VectorXd weights;

  // Cached rule with n points (n >= 1).
  static const GaussHermite& get(int n);
};

}  // namespace qsgp
