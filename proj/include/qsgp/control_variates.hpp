#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "qsgp/batch.hpp"
#include "qsgp/chevron.hpp"
#include "qsgp/common.hpp"
#include "qsgp/features.hpp"

namespace qsgp {

// Zero-mean correction term plus its sparse gradient. Gradient keys are
// global parameter indices (mu entries, or rows within one factor column).
struct CvCorrection {
  double value = 0.0;
  std::unordered_map<Index, double> grad;
};

// Support-row feature blocks of one batch, shared across the mean
// correction and every per-column correction of the same step.
struct CvBatchBlocks {
  MatrixXd phi_pi;             // Phi_{p, i~}
  MatrixXd phi_pj;             // Phi_{p, j~}
  std::vector<Index> touched;  // distinct i~ U j~, ascending
  MatrixXd phi_pt;             // Phi_{p, touched}
};

// Fixed-support control-variate state: the support rows p (drawn once,
// without replacement, before SGD), the feature map frozen at construction,
// and running vectors a = Phi_{p,:} v maintained incrementally for the
// variational mean and each tracked dense factor column.
//
// Single writer: updates are serialized by the optimizer; correction
// evaluation is read-only. The synced version must match the variational
// state version or corrections refuse to run.
class ControlVariateState {
 public:
  // C0 may be null when no factor columns are tracked. with_whitened_prior
  // additionally prepares the Nystrom machinery (inducing kind only):
  // a Cholesky factor of K(U,U) over the support inputs U = X_p and
  // whitened running vectors w = L^-1 K(U, Z) v.
  static ControlVariateState create(const BasisExpansion& frozen,
                                    const MatrixXd& X, Index n_bar,
                                    std::uint64_t seed, const VectorXd& mu0,
                                    const ChevronCholesky* C0,
                                    const std::vector<Index>& tracked_cols,
                                    bool with_whitened_prior = false,
                                    std::uint64_t initial_version = 0);

  const std::vector<Index>& support_rows() const { return p_; }
  Index n_bar() const { return static_cast<Index>(p_.size()); }
  const BasisExpansion& frozen_expansion() const { return frozen_; }
  const VectorXd& a_mu() const { return a_mu_; }
  const VectorXd& a_col(Index col) const;
  bool tracks_col(Index col) const { return a_cols_.count(col) > 0; }
  bool has_whitened_prior() const { return has_whitened_; }

  std::uint64_t synced_version() const { return synced_version_; }
  void mark_synced(std::uint64_t version) { synced_version_ = version; }
  void check_synced(std::uint64_t version) const;

  // Running-vector recurrence a <- a + Phi_{p,touched} (new - old);
  // O(n_bar |touched|).
  void update_mu(const MatrixXd& X, IndexSpan touched,
                 std::span<const double> old_vals,
                 std::span<const double> new_vals);
  void update_col(const MatrixXd& X, Index col, IndexSpan touched,
                  std::span<const double> old_vals,
                  std::span<const double> new_vals);

  // Whitened feature columns L^-1 K(U, Z_cols) for the Nystrom variant.
  MatrixXd whitened_block(IndexSpan cols) const;

  // Frozen-feature blocks over the support rows for one batch.
  CvBatchBlocks batch_blocks(const IndexBatch& batch, const MatrixXd& X) const;
  const VectorXd& w_mu() const;
  const VectorXd& w_col(Index col) const;

 private:
  explicit ControlVariateState(BasisExpansion frozen)
      : frozen_(std::move(frozen)) {}

  void apply_update(VectorXd& a, VectorXd* w, const MatrixXd& X,
                    IndexSpan touched, std::span<const double> old_vals,
                    std::span<const double> new_vals);

  BasisExpansion frozen_;
  std::vector<Index> p_;
  MatrixXd support_inputs_;  // X_p
  VectorXd a_mu_;
  std::map<Index, VectorXd> a_cols_;
  std::uint64_t synced_version_ = 0;

  bool has_whitened_ = false;
  MatrixXd whiten_l_;  // lower Cholesky of K(U,U) + jitter
  VectorXd w_mu_;
  std::map<Index, VectorXd> w_cols_;
};

// Deterministic expectation of the quadratic control variate,
//   value = n/(s2 n_bar) a'a,
// with the dense gradient restricted to the touched entries and scaled by
// m / |touched| so its expectation over index draws equals the dense
// gradient.
CvCorrection cv_expectation_with_sparse_grad_scaling(
    const ControlVariateState& cv, const MatrixXd& X, double sigma_sq, Index n,
    IndexSpan touched, Index m, Index col = -1,
    const CvBatchBlocks* blocks = nullptr);

// Quadratic-term control variate (col = -1 corrects the variational-mean
// term, col = r >= 0 corrects the term of factor column r):
//   -(n m^2)/(s2 n_bar m~^2) v_j~' Phi_{p,j~}' Phi_{p,i~} v_i~
//   + n/(s2 n_bar) a'a.
// Expectation over batches is zero.
CvCorrection cv_quadratic_correction(const IndexBatch& batch,
                                     const ControlVariateState& cv,
                                     const MatrixXd& X, double sigma_sq,
                                     Index n, const VectorXd& mu,
                                     std::uint64_t state_version,
                                     const CvBatchBlocks* blocks = nullptr);
CvCorrection cv_quadratic_correction(const IndexBatch& batch,
                                     const ControlVariateState& cv,
                                     const MatrixXd& X, double sigma_sq,
                                     Index n, const ChevronCholesky& C,
                                     Index col, std::uint64_t state_version,
                                     const CvBatchBlocks* blocks = nullptr);

// Nystrom control variate for the prior quadratic term of inducing-point
// expansions (S = K):
//   -(m/m~)^2 v_i~' K(Z_i~,U) K(U,U)^-1 K(U,Z_j~) v_j~ + |w|^2,
// where w = L^-1 K(U,Z) v is tracked by the same running recurrence.
CvCorrection cv_nystrom_correction(const IndexBatch& batch,
                                   const ControlVariateState& cv,
                                   const VectorXd& mu,
                                   std::uint64_t state_version);
CvCorrection cv_nystrom_correction(const IndexBatch& batch,
                                   const ControlVariateState& cv,
                                   const ChevronCholesky& C, Index col,
                                   std::uint64_t state_version);

// Linear-term control variate built on a precomputed b = Phi' y:
//   (2 m)/(s2 m~) b_i~' mu_i~ - (2/s2) b' mu,
// with b' mu tracked incrementally.
class LinearCvState {
 public:
  // O(n m) precomputation of b = Phi' y.
  static LinearCvState create(const BasisExpansion& frozen, const MatrixXd& X,
                              const VectorXd& y, const VectorXd& mu0,
                              std::uint64_t initial_version = 0);
  const VectorXd& b() const { return b_; }
  double running() const { return running_; }
  std::uint64_t synced_version() const { return synced_version_; }
  void mark_synced(std::uint64_t version) { synced_version_ = version; }
  void update(IndexSpan touched, std::span<const double> old_vals,
              std::span<const double> new_vals);

 private:
  VectorXd b_;
  double running_ = 0.0;
  std::uint64_t synced_version_ = 0;
};

CvCorrection cv_linear_correction(const IndexBatch& batch,
                                  const LinearCvState& lin, double sigma_sq,
                                  const VectorXd& mu,
                                  std::uint64_t state_version);

}  // namespace qsgp
