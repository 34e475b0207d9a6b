#pragma once

#include <string>
#include <vector>

#include "qsgp/common.hpp"

namespace qsgp {

// One row of the estimator diagnostic report: Monte Carlo mean, its standard
// error, the oracle value and the z-score of the discrepancy. Rows named
// cv_variance_* reuse the schema for the rank sweep (mean = corrected
// variance, oracle = uncorrected variance, z = 0).
struct DiagRow {
  std::string term;
  double mean = 0.0;
  double std_error = 0.0;
  double oracle = 0.0;
  double z = 0.0;
};

// Runs the built-in estimator checks on a fixed synthetic instance:
// unbiasedness of the three conjugate estimators, gradient means against
// the exact gradients, the one-sided bound direction of the site-projection
// estimator, control-variate zero-mean and the variance rank sweep.
std::vector<DiagRow> run_diagnostics(Index replicates, std::uint64_t seed);

}  // namespace qsgp
