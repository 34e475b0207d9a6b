#include "qsgp/chevron.hpp"

#include <cmath>

namespace qsgp {

ChevronCholesky::ChevronCholesky(Index m, Index dense_cols)
    : m_(m), k_(dense_cols) {
  require(m >= 1, "chevron: m must be >= 1");
  require(dense_cols >= 0 && dense_cols <= m, "chevron: 0 <= k <= m");
  cols_.reserve(static_cast<std::size_t>(k_));
  for (Index r = 0; r < k_; ++r) cols_.push_back(VectorXd::Zero(m_ - r));
  log_tail_ = VectorXd::Zero(m_ - k_);
}

double ChevronCholesky::log_diag_param(Index r) const {
  if (r < 0 || r >= m_) throw std::out_of_range("chevron: diagonal index");
  return r < k_ ? cols_[r][0] : log_tail_[r - k_];
}

double ChevronCholesky::entry(Index row, Index col) const {
  if (row < 0 || row >= m_ || col < 0 || col >= m_)
    throw std::out_of_range("chevron: entry index");
  if (!in_pattern(row, col)) return 0.0;
  if (row == col) return diag(row);
  return cols_[col][row - col];
}

void ChevronCholesky::set_entry(Index row, Index col, double value) {
  require(in_pattern(row, col), "chevron: slot outside pattern");
  if (row == col) {
    require(value > 0, "chevron: diagonal entries must be positive");
    set_param(row, col, std::log(value));
  } else {
    set_param(row, col, value);
  }
}

double ChevronCholesky::param(Index row, Index col) const {
  require(in_pattern(row, col), "chevron: slot outside pattern");
  if (row == col) return log_diag_param(row);
  return cols_[col][row - col];
}

void ChevronCholesky::set_param(Index row, Index col, double value) {
  require(in_pattern(row, col), "chevron: slot outside pattern");
  require(std::isfinite(value), "chevron: parameter must be finite");
  if (row == col) {
    if (row < k_)
      cols_[row][0] = value;
    else
      log_tail_[row - k_] = value;
  } else {
    cols_[col][row - col] = value;
  }
}

VectorXd ChevronCholesky::gather_column(IndexSpan idx, Index col) const {
  VectorXd out(static_cast<Index>(idx.size()));
  for (Index a = 0; a < out.size(); ++a) out[a] = entry(idx[a], col);
  return out;
}

MatrixXd ChevronCholesky::gather(IndexSpan idx, IndexSpan cols) const {
  MatrixXd out(static_cast<Index>(idx.size()), static_cast<Index>(cols.size()));
  for (Index b = 0; b < out.cols(); ++b)
    for (Index a = 0; a < out.rows(); ++a)
      out(a, b) = entry(idx[a], cols[b]);
  return out;
}

MatrixXd ChevronCholesky::to_dense() const {
  MatrixXd out = MatrixXd::Zero(m_, m_);
  for (Index r = 0; r < k_; ++r) {
    out(r, r) = diag(r);
    for (Index row = r + 1; row < m_; ++row) out(row, r) = cols_[r][row - r];
  }
  for (Index r = k_; r < m_; ++r) out(r, r) = diag(r);
  return out;
}

double ChevronCholesky::quadratic_form(const VectorXd& phi) const {
  require(phi.size() == m_, "chevron: quadratic_form size mismatch");
  double acc = 0.0;
  for (Index r = 0; r < k_; ++r) {
    double dot = diag(r) * phi[r];
    for (Index row = r + 1; row < m_; ++row)
      dot += cols_[r][row - r] * phi[row];
    acc += dot * dot;
  }
  for (Index r = k_; r < m_; ++r) {
    const double dot = diag(r) * phi[r];
    acc += dot * dot;
  }
  return acc;
}

}  // namespace qsgp
