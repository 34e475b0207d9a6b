#pragma once

#include <vector>

#include "qsgp/common.hpp"

namespace qsgp {

// Lower-triangular Cholesky factor with k dense leading columns and a
// diagonal tail, giving O(m k) parameters. All diagonal entries are stored
// in log form, so the implied factor always has a strictly positive
// diagonal and Sigma = C C' stays SPD by construction.
//
// Parameter space vs matrix space: off-diagonal slots coincide; for a
// diagonal slot the stored parameter is log c_rr.
class ChevronCholesky {
 public:
  // Identity factor (all log diagonals 0, off-diagonals 0).
  ChevronCholesky(Index m, Index dense_cols);

  Index dim() const { return m_; }
  Index dense_cols() const { return k_; }

  bool in_pattern(Index row, Index col) const {
    return row >= col && row < m_ && col >= 0 && (col < k_ || row == col);
  }

  double diag(Index r) const { return std::exp(log_diag_param(r)); }
  double log_diag_param(Index r) const;

  // Matrix entry; zero outside the pattern.
  double entry(Index row, Index col) const;
  void set_entry(Index row, Index col, double value);

  // Optimizer parameter at an in-pattern slot.
  double param(Index row, Index col) const;
  void set_param(Index row, Index col, double value);

  // c_{idx, col} as a dense gather.
  VectorXd gather_column(IndexSpan idx, Index col) const;
  // Columns cols restricted to rows idx: entry (a, b) = c_{idx[a], cols[b]}.
  MatrixXd gather(IndexSpan idx, IndexSpan cols) const;

  MatrixXd to_dense() const;

  // |C' phi|^2 evaluated with the chevron structure in O(m k + m).
  double quadratic_form(const VectorXd& phi) const;

  // Nonzero rows of column r (r..m-1 for dense columns, {r} for the tail).
  Index column_rows(Index r) const { return r < k_ ? m_ - r : 1; }

 private:
  Index m_ = 0;
  Index k_ = 0;
  // Dense column r holds [log c_rr, c_{r+1,r}, ..., c_{m-1,r}].
  std::vector<VectorXd> cols_;
  VectorXd log_tail_;  // log c_rr for r >= k
};

}  // namespace qsgp
