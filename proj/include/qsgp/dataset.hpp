#pragma once

#include <string>

#include "qsgp/common.hpp"
#include "qsgp/sites.hpp"

namespace qsgp {

// Column-wise affine transforms fitted on the training data; columns with
// (near) zero variance keep a unit divisor and standardize to all zeros.
struct Standardizer {
  VectorXd x_mean, x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  bool targets_standardized = false;

  VectorXd apply_x(const VectorXd& x) const {
    return (x - x_mean).cwiseQuotient(x_scale);
  }
  double apply_y(double y) const {
    return targets_standardized ? (y - y_mean) / y_scale : y;
  }
  double invert_y_mean(double y_std) const {
    return targets_standardized ? y_std * y_scale + y_mean : y_std;
  }
  double invert_y_variance(double var_std) const {
    return targets_standardized ? var_std * y_scale * y_scale : var_std;
  }
};

struct Dataset {
  MatrixXd X;       // standardized features
  VectorXd y;       // standardized (regression) or +-1 (logistic) targets
  VectorXd y_raw;   // targets in original units
  Standardizer standardizer;

  Index n() const { return X.rows(); }
  Index d() const { return X.cols(); }
};

enum class HeaderMode { kAuto, kYes, kNo };

struct CsvOptions {
  HeaderMode header = HeaderMode::kAuto;
  Index target_column = -1;  // -1: last column
  char delimiter = ',';
};

// Parses a numeric CSV, standardizes features to zero mean / unit variance
// and (for regression likelihoods) targets likewise. Logistic targets may be
// given as {0,1} or {-1,+1} and are mapped to {-1,+1}.
Dataset load_csv(const std::string& path, const CsvOptions& options,
                 Likelihood likelihood);

// Same parse applied to an in-memory buffer (used by tests).
Dataset parse_csv(const std::string& text, const CsvOptions& options,
                  Likelihood likelihood);

// Standardization applied to already-numeric data.
Dataset standardize_dataset(MatrixXd X, VectorXd y, Likelihood likelihood);

// Noisy sinc regression set: x uniform on [-5, 5], y = sinc(x) + eps,
// eps ~ N(0, noise_sd^2). Deterministic in the seed.
Dataset make_sinc_dataset(Index n, double noise_sd, std::uint64_t seed);

// Two Gaussian blobs at +-center with unit-ish spread, labels +-1.
Dataset make_two_blob_dataset(Index n, double separation, std::uint64_t seed);

// Writes a dataset to CSV in original units (demo export).
void write_csv(const std::string& path, const Dataset& data);

}  // namespace qsgp
