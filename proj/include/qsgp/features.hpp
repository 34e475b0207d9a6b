#pragma once

#include <memory>
#include <vector>

#include "qsgp/common.hpp"
#include "qsgp/hyperparameters.hpp"

namespace qsgp {

enum class ExpansionKind { kRffSeArd, kInducingPoint, kExplicitDictionary };

// Squared-exponential ARD kernel sigma_f^2 * exp(-1/2 sum_k ((x_k-z_k)/l_k)^2).
double se_ard_kernel(const VectorXd& x, const VectorXd& z,
                     const Hyperparameters& hyper);

// A basis-function expansion that produces arbitrary blocks of the feature
// matrix Phi and of the prior precision S on demand. Entries are regenerated
// from seeds or kernel evaluations, so no n-by-m array is ever materialized.
//
// Kinds:
//   kRffSeArd           paired sin/cos random Fourier features,
//                       phi_{2j}(x)   = sqrt(2 sigma_f^2 / m) cos(w_j . (x / l))
//                       phi_{2j+1}(x) = sqrt(2 sigma_f^2 / m) sin(w_j . (x / l))
//                       with w_j ~ N(0, I_d) regenerated from (seed, j).
//                       S = I (the kernel variance is absorbed into Phi).
//   kInducingPoint      phi_j(x) = k(x, z_j), s_ij = k(z_i, z_j) + jitter on
//                       the global diagonal.
//   kExplicitDictionary phi_j(x) = k(x, z_j), S = diag(s) with caller-supplied
//                       (and externally trainable) per-basis precisions s.
//
// Immutable after construction except for the dictionary precision vector,
// which is shared storage with at most one external writer.
class BasisExpansion {
 public:
  static BasisExpansion rff_se_ard(Index m, Index input_dim,
                                   std::uint64_t seed, Hyperparameters hyper);
  static BasisExpansion inducing_point(MatrixXd centers, Hyperparameters hyper);
  static BasisExpansion explicit_dictionary(MatrixXd centers, VectorXd s,
                                            Hyperparameters hyper);

  ExpansionKind kind() const { return kind_; }
  Index m() const { return m_; }
  Index input_dim() const { return input_dim_; }
  std::uint64_t seed() const { return seed_; }
  const Hyperparameters& hyper() const { return hyper_; }
  bool has_diagonal_prior() const { return kind_ != ExpansionKind::kInducingPoint; }
  const MatrixXd& centers() const;

  // Same expansion with different hyperparameters; centers are shared.
  BasisExpansion with_hyper(Hyperparameters hyper) const;

  // Entry (a, b) = phi_{cols[b]}(x_{rows[a]}). Allocates |rows| x |cols| only.
  MatrixXd feature_block(const MatrixXd& X, IndexSpan rows,
                         IndexSpan cols) const;

  // All m features of one point.
  VectorXd feature_row(const VectorXd& x) const;

  // S_{rows, cols}.
  MatrixXd prior_precision_block(IndexSpan rows, IndexSpan cols) const;

  // Diagonal of S for diagonal-prior kinds.
  double s_diag(Index i) const;

  // d(feature_block)/d(theta) for theta in {log lengthscale_0..d-1,
  // log signal variance}, in that order. kRffSeArd only.
  std::vector<MatrixXd> feature_block_grad_hyper(const MatrixXd& X,
                                                 IndexSpan rows,
                                                 IndexSpan cols) const;

  // Dictionary precision access (kExplicitDictionary only). set_dictionary_s
  // is the single-writer channel used by precision learning.
  const VectorXd& dictionary_s() const;
  void set_dictionary_s(Index i, double value) const;

 private:
  BasisExpansion() = default;

  void check_rows(IndexSpan rows, Index n) const;
  void check_cols(IndexSpan cols) const;
  // w_j for feature pair j, regenerated from (seed, j).
  VectorXd omega(Index pair) const;

  ExpansionKind kind_ = ExpansionKind::kRffSeArd;
  Index m_ = 0;
  Index input_dim_ = 0;
  std::uint64_t seed_ = 0;
  Hyperparameters hyper_;
  std::shared_ptr<const MatrixXd> centers_;
  std::shared_ptr<VectorXd> dict_s_;
};

}  // namespace qsgp
