#include "qsgp/control_variates.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_set>

#include <Eigen/Cholesky>

namespace qsgp {

namespace {

constexpr Index kInitChunk = 4096;

std::vector<Index> draw_support(Index n, Index n_bar, std::uint64_t seed) {
  require(n_bar >= 1 && n_bar <= n, "control variate: need 1 <= n_bar <= n");
  CounterRng rng(rng_key(seed, kStreamSupport));
  std::vector<Index> p;
  p.reserve(static_cast<std::size_t>(n_bar));
  if (n_bar * 2 <= n) {
    std::unordered_set<Index> seen;
    while (static_cast<Index>(p.size()) < n_bar) {
      const Index cand = rng.next_below(n);
      if (seen.insert(cand).second) p.push_back(cand);
    }
  } else {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (Index t = 0; t < n_bar; ++t)
      std::swap(pool[static_cast<std::size_t>(t)],
                pool[static_cast<std::size_t>(t + rng.next_below(n - t))]);
    pool.resize(static_cast<std::size_t>(n_bar));
    p = std::move(pool);
  }
  std::sort(p.begin(), p.end());
  return p;
}

// Nonzero entries of one chevron column as (rows, values).
std::pair<std::vector<Index>, std::vector<double>> column_nonzeros(
    const ChevronCholesky& C, Index col) {
  std::vector<Index> rows;
  std::vector<double> vals;
  for (Index row = col; row < C.dim(); ++row) {
    if (!C.in_pattern(row, col)) continue;
    const double v = C.entry(row, col);
    if (v != 0.0) {
      rows.push_back(row);
      vals.push_back(v);
    }
  }
  return {std::move(rows), std::move(vals)};
}

}  // namespace

ControlVariateState ControlVariateState::create(
    const BasisExpansion& frozen, const MatrixXd& X, Index n_bar,
    std::uint64_t seed, const VectorXd& mu0, const ChevronCholesky* C0,
    const std::vector<Index>& tracked_cols, bool with_whitened_prior,
    std::uint64_t initial_version) {
  require(mu0.size() == frozen.m(), "control variate: mu size mismatch");
  ControlVariateState cv(frozen);
  cv.p_ = draw_support(X.rows(), n_bar, seed);
  cv.support_inputs_ = MatrixXd(n_bar, X.cols());
  for (Index a = 0; a < n_bar; ++a)
    cv.support_inputs_.row(a) = X.row(cv.p_[static_cast<std::size_t>(a)]);
  cv.synced_version_ = initial_version;

  if (with_whitened_prior) {
    require(frozen.kind() == ExpansionKind::kInducingPoint,
            "whitened prior tracking needs an inducing-point expansion");
    const double sf2 = frozen.hyper().signal_variance();
    MatrixXd kuu(n_bar, n_bar);
    for (Index a = 0; a < n_bar; ++a)
      for (Index b = 0; b < n_bar; ++b)
        kuu(a, b) = se_ard_kernel(cv.support_inputs_.row(a),
                                  cv.support_inputs_.row(b), frozen.hyper());
    Eigen::LLT<MatrixXd> llt(kuu + 1e-8 * sf2 *
                                       MatrixXd::Identity(n_bar, n_bar));
    if (llt.info() != Eigen::Success) {
      llt.compute(kuu + 1e-6 * sf2 * MatrixXd::Identity(n_bar, n_bar));
      if (llt.info() != Eigen::Success)
        throw NumericError("control variate: K(U,U) factorization failed");
    }
    cv.whiten_l_ = llt.matrixL();
    cv.has_whitened_ = true;
  }

  // a(0) = Phi_{p,:} v(0); zero when starting from zero, otherwise one
  // chunked O(n_bar m) pass.
  cv.a_mu_ = VectorXd::Zero(n_bar);
  if (cv.has_whitened_) cv.w_mu_ = VectorXd::Zero(n_bar);
  if (!mu0.isZero(0.0)) {
    for (Index start = 0; start < frozen.m(); start += kInitChunk) {
      const Index stop = std::min(frozen.m(), start + kInitChunk);
      std::vector<Index> cols(static_cast<std::size_t>(stop - start));
      for (Index c = start; c < stop; ++c)
        cols[static_cast<std::size_t>(c - start)] = c;
      const VectorXd seg = mu0.segment(start, stop - start);
      cv.a_mu_ += frozen.feature_block(X, cv.p_, cols) * seg;
      if (cv.has_whitened_) cv.w_mu_ += cv.whitened_block(cols) * seg;
    }
  }
  for (const Index col : tracked_cols) {
    require(C0 != nullptr, "control variate: tracked columns need a factor");
    require(col >= 0 && col < C0->dense_cols(),
            "control variate: tracked columns must be dense factor columns");
    auto [rows, vals] = column_nonzeros(*C0, col);
    VectorXd a = VectorXd::Zero(n_bar);
    VectorXd w = VectorXd::Zero(n_bar);
    if (!rows.empty()) {
      const Eigen::Map<const VectorXd> v(vals.data(),
                                         static_cast<Index>(vals.size()));
      a = frozen.feature_block(X, cv.p_, rows) * v;
      if (cv.has_whitened_) w = cv.whitened_block(rows) * v;
    }
    cv.a_cols_.emplace(col, std::move(a));
    if (cv.has_whitened_) cv.w_cols_.emplace(col, std::move(w));
  }
  return cv;
}

const VectorXd& ControlVariateState::a_col(Index col) const {
  auto it = a_cols_.find(col);
  if (it == a_cols_.end())
    throw std::invalid_argument("control variate: column is not tracked");
  return it->second;
}

void ControlVariateState::check_synced(std::uint64_t version) const {
  if (version != synced_version_)
    throw InvalidState("control variate: running vectors are stale");
}

void ControlVariateState::apply_update(VectorXd& a, VectorXd* w,
                                       const MatrixXd& X, IndexSpan touched,
                                       std::span<const double> old_vals,
                                       std::span<const double> new_vals) {
  require(touched.size() == old_vals.size() &&
              touched.size() == new_vals.size(),
          "control variate: touched/value size mismatch");
  if (touched.empty()) return;
  VectorXd delta(static_cast<Index>(touched.size()));
  for (Index t = 0; t < delta.size(); ++t)
    delta[t] = new_vals[static_cast<std::size_t>(t)] -
               old_vals[static_cast<std::size_t>(t)];
  if (delta.isZero(0.0)) return;
  a += frozen_.feature_block(X, p_, touched) * delta;
  if (w != nullptr) *w += whitened_block(touched) * delta;
}

void ControlVariateState::update_mu(const MatrixXd& X, IndexSpan touched,
                                    std::span<const double> old_vals,
                                    std::span<const double> new_vals) {
  apply_update(a_mu_, has_whitened_ ? &w_mu_ : nullptr, X, touched, old_vals,
               new_vals);
}

void ControlVariateState::update_col(const MatrixXd& X, Index col,
                                     IndexSpan touched,
                                     std::span<const double> old_vals,
                                     std::span<const double> new_vals) {
  auto it = a_cols_.find(col);
  if (it == a_cols_.end())
    throw std::invalid_argument("control variate: column is not tracked");
  VectorXd* w = nullptr;
  if (has_whitened_) w = &w_cols_.at(col);
  apply_update(it->second, w, X, touched, old_vals, new_vals);
}

MatrixXd ControlVariateState::whitened_block(IndexSpan cols) const {
  require(has_whitened_, "control variate: no whitened prior tracking");
  const MatrixXd& Z = frozen_.centers();
  MatrixXd kuz(n_bar(), static_cast<Index>(cols.size()));
  for (Index b = 0; b < kuz.cols(); ++b) {
    const Index c = cols[static_cast<std::size_t>(b)];
    if (c < 0 || c >= frozen_.m())
      throw std::out_of_range("whitened_block: column index");
    for (Index a = 0; a < n_bar(); ++a)
      kuz(a, b) =
          se_ard_kernel(support_inputs_.row(a), Z.row(c), frozen_.hyper());
  }
  return whiten_l_.triangularView<Eigen::Lower>().solve(kuz);
}

const VectorXd& ControlVariateState::w_mu() const {
  require(has_whitened_, "control variate: no whitened prior tracking");
  return w_mu_;
}

const VectorXd& ControlVariateState::w_col(Index col) const {
  require(has_whitened_, "control variate: no whitened prior tracking");
  auto it = w_cols_.find(col);
  if (it == w_cols_.end())
    throw std::invalid_argument("control variate: column is not tracked");
  return it->second;
}

CvCorrection cv_expectation_with_sparse_grad_scaling(
    const ControlVariateState& cv, const MatrixXd& X, double sigma_sq, Index n,
    IndexSpan touched, Index m, Index col, const CvBatchBlocks* blocks) {
  require(!touched.empty(), "sparse grad scaling: touched set is empty");
  const double coef =
      static_cast<double>(n) / (sigma_sq * static_cast<double>(cv.n_bar()));
  const VectorXd& a = col < 0 ? cv.a_mu() : cv.a_col(col);
  CvCorrection out;
  out.value = coef * a.squaredNorm();

  // Dense gradient of a'a restricted to the touched entries, scaled by
  // m / |touched| so the sparsified gradient stays unbiased.
  const double scale =
      static_cast<double>(m) / static_cast<double>(touched.size());
  const bool reuse = blocks != nullptr &&
                     std::equal(touched.begin(), touched.end(),
                                blocks->touched.begin(),
                                blocks->touched.end());
  std::optional<MatrixXd> local;
  if (!reuse)
    local = cv.frozen_expansion().feature_block(X, cv.support_rows(), touched);
  const MatrixXd& block = reuse ? blocks->phi_pt : *local;
  const VectorXd g = 2.0 * coef * scale * (block.transpose() * a);
  for (Index b = 0; b < g.size(); ++b) {
    const Index t = touched[static_cast<std::size_t>(b)];
    if (col < 0 || t >= col) out.grad[t] += g[b];
  }
  return out;
}

namespace {

// Shared body of the quadratic correction; entries of v are gathered by a
// callable so the same code serves mu (all slots valid) and one factor
// column (slots below the diagonal of that column).
template <class Gather, class Valid>
CvCorrection quadratic_correction_impl(const IndexBatch& batch,
                                       const ControlVariateState& cv,
                                       const MatrixXd& X, double sigma_sq,
                                       Index n, Index col,
                                       const Gather& gather_v,
                                       const Valid& valid_slot,
                                       std::uint64_t state_version,
                                       const CvBatchBlocks* blocks) {
  cv.check_synced(state_version);
  const auto m = static_cast<double>(cv.frozen_expansion().m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const double coef_s = static_cast<double>(n) * m * m /
                        (sigma_sq * static_cast<double>(cv.n_bar()) * mt * mt);

  std::optional<CvBatchBlocks> local;
  if (blocks == nullptr) {
    local = cv.batch_blocks(batch, X);
    blocks = &*local;
  }
  const MatrixXd& phi_pi = blocks->phi_pi;
  const MatrixXd& phi_pj = blocks->phi_pj;
  VectorXd vi(batch.m_tilde()), vj(batch.m_tilde());
  for (Index b = 0; b < batch.m_tilde(); ++b) {
    vi[b] = gather_v(batch.i_tilde[b]);
    vj[b] = gather_v(batch.j_tilde[b]);
  }
  const VectorXd ui = phi_pi * vi;
  const VectorXd uj = phi_pj * vj;

  CvCorrection out;
  out.value = -coef_s * uj.dot(ui);
  const VectorXd gi = -coef_s * (phi_pi.transpose() * uj);
  const VectorXd gj = -coef_s * (phi_pj.transpose() * ui);
  for (Index b = 0; b < batch.m_tilde(); ++b) {
    if (valid_slot(batch.i_tilde[b])) out.grad[batch.i_tilde[b]] += gi[b];
    if (valid_slot(batch.j_tilde[b])) out.grad[batch.j_tilde[b]] += gj[b];
  }

  CvCorrection det = cv_expectation_with_sparse_grad_scaling(
      cv, X, sigma_sq, n, blocks->touched, cv.frozen_expansion().m(), col,
      blocks);
  out.value += det.value;
  for (const auto& [k, g] : det.grad) out.grad[k] += g;
  return out;
}

template <class Gather, class Valid>
CvCorrection nystrom_correction_impl(const IndexBatch& batch,
                                     const ControlVariateState& cv,
                                     Index col, const Gather& gather_v,
                                     const Valid& valid_slot,
                                     std::uint64_t state_version) {
  cv.check_synced(state_version);
  require(cv.has_whitened_prior(),
          "nystrom correction: state lacks whitened prior tracking");
  const auto m = static_cast<double>(cv.frozen_expansion().m());
  const auto mt = static_cast<double>(batch.m_tilde());
  const double gamma = (m / mt) * (m / mt);

  const MatrixXd wi_blk = cv.whitened_block(batch.i_tilde);
  const MatrixXd wj_blk = cv.whitened_block(batch.j_tilde);
  VectorXd vi(batch.m_tilde()), vj(batch.m_tilde());
  for (Index b = 0; b < batch.m_tilde(); ++b) {
    vi[b] = gather_v(batch.i_tilde[b]);
    vj[b] = gather_v(batch.j_tilde[b]);
  }
  const VectorXd wi = wi_blk * vi;
  const VectorXd wj = wj_blk * vj;
  const VectorXd& w_run = col < 0 ? cv.w_mu() : cv.w_col(col);

  CvCorrection out;
  out.value = -gamma * wj.dot(wi) + w_run.squaredNorm();
  const VectorXd gi = -gamma * (wi_blk.transpose() * wj);
  const VectorXd gj = -gamma * (wj_blk.transpose() * wi);
  for (Index b = 0; b < batch.m_tilde(); ++b) {
    if (valid_slot(batch.i_tilde[b])) out.grad[batch.i_tilde[b]] += gi[b];
    if (valid_slot(batch.j_tilde[b])) out.grad[batch.j_tilde[b]] += gj[b];
  }

  const auto touched = touched_union(batch);
  const double scale = m / static_cast<double>(touched.size());
  std::vector<Index> valid;
  for (const Index t : touched)
    if (valid_slot(t)) valid.push_back(t);
  if (!valid.empty()) {
    const MatrixXd blk = cv.whitened_block(valid);
    const VectorXd g = 2.0 * scale * (blk.transpose() * w_run);
    for (Index b = 0; b < g.size(); ++b)
      out.grad[valid[static_cast<std::size_t>(b)]] += g[b];
  }
  return out;
}

}  // namespace

CvBatchBlocks ControlVariateState::batch_blocks(const IndexBatch& batch,
                                                const MatrixXd& X) const {
  CvBatchBlocks blocks;
  blocks.phi_pi = frozen_.feature_block(X, p_, batch.i_tilde);
  blocks.phi_pj = frozen_.feature_block(X, p_, batch.j_tilde);
  blocks.touched = touched_union(batch);
  blocks.phi_pt = frozen_.feature_block(X, p_, blocks.touched);
  return blocks;
}

CvCorrection cv_quadratic_correction(const IndexBatch& batch,
                                     const ControlVariateState& cv,
                                     const MatrixXd& X, double sigma_sq,
                                     Index n, const VectorXd& mu,
                                     std::uint64_t state_version,
                                     const CvBatchBlocks* blocks) {
  require(mu.size() == cv.frozen_expansion().m(),
          "cv_quadratic_correction: mu size mismatch");
  return quadratic_correction_impl(
      batch, cv, X, sigma_sq, n, -1, [&](Index k) { return mu[k]; },
      [](Index) { return true; }, state_version, blocks);
}

CvCorrection cv_quadratic_correction(const IndexBatch& batch,
                                     const ControlVariateState& cv,
                                     const MatrixXd& X, double sigma_sq,
                                     Index n, const ChevronCholesky& C,
                                     Index col, std::uint64_t state_version,
                                     const CvBatchBlocks* blocks) {
  require(cv.tracks_col(col), "cv_quadratic_correction: column not tracked");
  return quadratic_correction_impl(
      batch, cv, X, sigma_sq, n, col,
      [&](Index k) { return C.entry(k, col); },
      [&](Index k) { return C.in_pattern(k, col); }, state_version, blocks);
}

CvCorrection cv_nystrom_correction(const IndexBatch& batch,
                                   const ControlVariateState& cv,
                                   const VectorXd& mu,
                                   std::uint64_t state_version) {
  require(mu.size() == cv.frozen_expansion().m(),
          "cv_nystrom_correction: mu size mismatch");
  return nystrom_correction_impl(
      batch, cv, -1, [&](Index k) { return mu[k]; },
      [](Index) { return true; }, state_version);
}

CvCorrection cv_nystrom_correction(const IndexBatch& batch,
                                   const ControlVariateState& cv,
                                   const ChevronCholesky& C, Index col,
                                   std::uint64_t state_version) {
  require(cv.tracks_col(col), "cv_nystrom_correction: column not tracked");
  return nystrom_correction_impl(
      batch, cv, col, [&](Index k) { return C.entry(k, col); },
      [&](Index k) { return C.in_pattern(k, col); }, state_version);
}

LinearCvState LinearCvState::create(const BasisExpansion& frozen,
                                    const MatrixXd& X, const VectorXd& y,
                                    const VectorXd& mu0,
                                    std::uint64_t initial_version) {
  require(X.rows() == y.size(), "linear cv: y size mismatch");
  require(mu0.size() == frozen.m(), "linear cv: mu size mismatch");
  LinearCvState lin;
  lin.b_ = VectorXd::Zero(frozen.m());
  std::vector<Index> rows(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  for (Index start = 0; start < frozen.m(); start += kInitChunk) {
    const Index stop = std::min(frozen.m(), start + kInitChunk);
    std::vector<Index> cols(static_cast<std::size_t>(stop - start));
    for (Index c = start; c < stop; ++c)
      cols[static_cast<std::size_t>(c - start)] = c;
    lin.b_.segment(start, stop - start) =
        frozen.feature_block(X, rows, cols).transpose() * y;
  }
  lin.running_ = lin.b_.dot(mu0);
  lin.synced_version_ = initial_version;
  return lin;
}

void LinearCvState::update(IndexSpan touched, std::span<const double> old_vals,
                           std::span<const double> new_vals) {
  require(touched.size() == old_vals.size() &&
              touched.size() == new_vals.size(),
          "linear cv: touched/value size mismatch");
  for (std::size_t t = 0; t < touched.size(); ++t)
    running_ += b_[touched[t]] * (new_vals[t] - old_vals[t]);
}

CvCorrection cv_linear_correction(const IndexBatch& batch,
                                  const LinearCvState& lin, double sigma_sq,
                                  const VectorXd& mu,
                                  std::uint64_t state_version) {
  if (lin.synced_version() != state_version)
    throw InvalidState("linear cv: running value is stale");
  const auto m = static_cast<double>(lin.b().size());
  const auto mt = static_cast<double>(batch.m_tilde());
  const double coef_s = 2.0 * m / (sigma_sq * mt);

  CvCorrection out;
  double stoch = 0.0;
  for (const Index i : batch.i_tilde) stoch += lin.b()[i] * mu[i];
  out.value = coef_s * stoch - 2.0 / sigma_sq * lin.running();
  for (const Index i : batch.i_tilde) out.grad[i] += coef_s * lin.b()[i];

  const auto touched = touched_union(batch);
  const double scale = m / static_cast<double>(touched.size());
  for (const Index t : touched)
    out.grad[t] += scale * (-2.0 / sigma_sq) * lin.b()[t];
  return out;
}

}  // namespace qsgp
