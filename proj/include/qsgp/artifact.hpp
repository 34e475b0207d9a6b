#pragma once

#include <optional>
#include <string>

#include "qsgp/dataset.hpp"
#include "qsgp/features.hpp"
#include "qsgp/optimizer.hpp"

namespace qsgp {

// Self-describing model container: a JSON text header (structure, counts,
// integers, strings) followed by raw little-endian 64-bit float arrays, so
// a save/load round trip reproduces predictions bit-identically. Files are
// written atomically (temp + rename).
struct ModelArtifact {
  std::uint32_t format_version = 1;

  ExpansionKind kind = ExpansionKind::kRffSeArd;
  Index m = 0;
  Index input_dim = 0;
  std::uint64_t rff_seed = 0;
  Hyperparameters hyper;                      // current (post empirical Bayes)
  std::optional<Hyperparameters> frozen_hyper;  // initialization snapshot
  std::optional<MatrixXd> centers;            // inducing / dictionary kinds
  std::optional<VectorXd> dictionary_s;

  VectorXd mu;
  Index chevron_k = 0;
  std::vector<VectorXd> dense_cols;  // col r: [log diag, off-diagonals]
  VectorXd log_diag_tail;
  std::optional<VectorXd> rvm_log_s;

  Standardizer standardizer;
  Likelihood likelihood = Likelihood::kGaussian;
  int quad_points = 101;

  // training-config echo (reproducibility metadata)
  Index cfg_m_tilde = 0, cfg_n_tilde = 0, cfg_n_bar = 0, cfg_iterations = 0;
  std::uint64_t cfg_seed = 0;

  static ModelArtifact from_training(const BasisExpansion& ex,
                                     const TrainResult& result,
                                     const Standardizer& standardizer,
                                     const TrainConfig& config);

  BasisExpansion expansion() const;
  VariationalState variational_state() const;

  void save(const std::string& path) const;
  static ModelArtifact load(const std::string& path);
};

}  // namespace qsgp
