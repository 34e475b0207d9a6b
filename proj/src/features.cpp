#include "qsgp/features.hpp"

#include <cmath>

namespace qsgp {

namespace {
constexpr double kGramJitterRel = 1e-8;
}

double se_ard_kernel(const VectorXd& x, const VectorXd& z,
                     const Hyperparameters& hyper) {
  require(x.size() == z.size(), "se_ard_kernel: dimension mismatch");
  require(x.size() == hyper.input_dim(),
          "se_ard_kernel: hyperparameter dimension mismatch");
  require(x.allFinite() && z.allFinite(), "se_ard_kernel: non-finite input");
  double q = 0.0;
  for (Index k = 0; k < x.size(); ++k) {
    const double r = (x[k] - z[k]) / hyper.lengthscale(k);
    q += r * r;
  }
  return hyper.signal_variance() * std::exp(-0.5 * q);
}

BasisExpansion BasisExpansion::rff_se_ard(Index m, Index input_dim,
                                          std::uint64_t seed,
                                          Hyperparameters hyper) {
  require(m >= 2 && m % 2 == 0, "rff_se_ard: m must be even and >= 2");
  require(input_dim >= 1, "rff_se_ard: input_dim must be >= 1");
  require(hyper.input_dim() == input_dim,
          "rff_se_ard: hyperparameter dimension mismatch");
  hyper.validate();
  BasisExpansion e;
  e.kind_ = ExpansionKind::kRffSeArd;
  e.m_ = m;
  e.input_dim_ = input_dim;
  e.seed_ = seed;
  e.hyper_ = std::move(hyper);
  return e;
}

BasisExpansion BasisExpansion::inducing_point(MatrixXd centers,
                                              Hyperparameters hyper) {
  require(centers.rows() >= 1, "inducing_point: need at least one center");
  require(centers.cols() == hyper.input_dim(),
          "inducing_point: hyperparameter dimension mismatch");
  require(centers.allFinite(), "inducing_point: non-finite centers");
  hyper.validate();
  BasisExpansion e;
  e.kind_ = ExpansionKind::kInducingPoint;
  e.m_ = centers.rows();
  e.input_dim_ = centers.cols();
  e.hyper_ = std::move(hyper);
  e.centers_ = std::make_shared<const MatrixXd>(std::move(centers));
  return e;
}

BasisExpansion BasisExpansion::explicit_dictionary(MatrixXd centers, VectorXd s,
                                                   Hyperparameters hyper) {
  require(centers.rows() >= 1, "explicit_dictionary: need at least one center");
  require(s.size() == centers.rows(),
          "explicit_dictionary: s/centers size mismatch");
  require((s.array() > 0).all(), "explicit_dictionary: s must be positive");
  require(centers.cols() == hyper.input_dim(),
          "explicit_dictionary: hyperparameter dimension mismatch");
  hyper.validate();
  BasisExpansion e;
  e.kind_ = ExpansionKind::kExplicitDictionary;
  e.m_ = centers.rows();
  e.input_dim_ = centers.cols();
  e.hyper_ = std::move(hyper);
  e.centers_ = std::make_shared<const MatrixXd>(std::move(centers));
  e.dict_s_ = std::make_shared<VectorXd>(std::move(s));
  return e;
}

const MatrixXd& BasisExpansion::centers() const {
  require(centers_ != nullptr, "expansion kind has no centers");
  return *centers_;
}

BasisExpansion BasisExpansion::with_hyper(Hyperparameters hyper) const {
  require(hyper.input_dim() == input_dim_, "with_hyper: dimension mismatch");
  hyper.validate();
  BasisExpansion e = *this;
  e.hyper_ = std::move(hyper);
  return e;
}

void BasisExpansion::check_rows(IndexSpan rows, Index n) const {
  for (const Index r : rows) {
    if (r < 0 || r >= n) throw std::out_of_range("feature block: row index out of range");
  }
}

void BasisExpansion::check_cols(IndexSpan cols) const {
  for (const Index c : cols) {
    if (c < 0 || c >= m_) throw std::out_of_range("feature block: column index out of range");
  }
}

VectorXd BasisExpansion::omega(Index pair) const {
  VectorXd w(input_dim_);
  for (Index k = 0; k < input_dim_; ++k) {
    CounterRng rng(rng_key(seed_, kStreamOmega, static_cast<std::uint64_t>(pair),
                           static_cast<std::uint64_t>(k)));
    w[k] = rng.next_normal();
  }
  return w;
}

MatrixXd BasisExpansion::feature_block(const MatrixXd& X, IndexSpan rows,
                                       IndexSpan cols) const {
  check_rows(rows, X.rows());
  check_cols(cols);
  require(X.cols() == input_dim_, "feature_block: data dimension mismatch");
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = static_cast<Index>(cols.size());
  MatrixXd out(nr, nc);

  if (kind_ == ExpansionKind::kRffSeArd) {
    // X rows pre-scaled by the inverse lengthscales once per call.
    MatrixXd xs(nr, input_dim_);
    for (Index a = 0; a < nr; ++a)
      for (Index k = 0; k < input_dim_; ++k)
        xs(a, k) = X(rows[a], k) / hyper_.lengthscale(k);
    const double amp = std::sqrt(2.0 * hyper_.signal_variance() /
                                 static_cast<double>(m_));
    for (Index b = 0; b < nc; ++b) {
      const Index c = cols[b];
      const VectorXd w = omega(c / 2);
      const VectorXd arg = xs * w;
      if (c % 2 == 0)
        out.col(b) = amp * arg.array().cos();
      else
        out.col(b) = amp * arg.array().sin();
    }
    return out;
  }

  // kernel kinds: inlined SE-ARD evaluation, no per-entry temporaries
  const MatrixXd& Z = *centers_;
  require(X.allFinite(), "feature_block: non-finite input");
  VectorXd inv_ls(input_dim_);
  for (Index k = 0; k < input_dim_; ++k) inv_ls[k] = 1.0 / hyper_.lengthscale(k);
  const double sf2 = hyper_.signal_variance();
  for (Index b = 0; b < nc; ++b) {
    const Index c = cols[b];
    for (Index a = 0; a < nr; ++a) {
      const Index r = rows[a];
      double q = 0.0;
      for (Index k = 0; k < input_dim_; ++k) {
        const double diff = (X(r, k) - Z(c, k)) * inv_ls[k];
        q += diff * diff;
      }
      out(a, b) = sf2 * std::exp(-0.5 * q);
    }
  }
  return out;
}

VectorXd BasisExpansion::feature_row(const VectorXd& x) const {
  require(x.size() == input_dim_, "feature_row: dimension mismatch");
  VectorXd out(m_);
  if (kind_ == ExpansionKind::kRffSeArd) {
    VectorXd xl(input_dim_);
    for (Index k = 0; k < input_dim_; ++k) xl[k] = x[k] / hyper_.lengthscale(k);
    const double amp =
        std::sqrt(2.0 * hyper_.signal_variance() / static_cast<double>(m_));
    for (Index p = 0; p < m_ / 2; ++p) {
      const double arg = omega(p).dot(xl);
      out[2 * p] = amp * std::cos(arg);
      out[2 * p + 1] = amp * std::sin(arg);
    }
    return out;
  }
  const MatrixXd& Z = *centers_;
  for (Index j = 0; j < m_; ++j)
    out[j] = se_ard_kernel(x, Z.row(j), hyper_);
  return out;
}

MatrixXd BasisExpansion::prior_precision_block(IndexSpan rows,
                                               IndexSpan cols) const {
  check_cols(rows);  // both index sets range over basis functions
  check_cols(cols);
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = static_cast<Index>(cols.size());
  MatrixXd out = MatrixXd::Zero(nr, nc);
  switch (kind_) {
    case ExpansionKind::kRffSeArd:
      for (Index a = 0; a < nr; ++a)
        for (Index b = 0; b < nc; ++b)
          if (rows[a] == cols[b]) out(a, b) = 1.0;
      return out;
    case ExpansionKind::kExplicitDictionary:
      for (Index a = 0; a < nr; ++a)
        for (Index b = 0; b < nc; ++b)
          if (rows[a] == cols[b]) out(a, b) = (*dict_s_)[rows[a]];
      return out;
    case ExpansionKind::kInducingPoint: {
      // Jitter sits on the diagonal of the *global* S so that every block
      // extraction sees the same matrix.
      const double jitter = kGramJitterRel * hyper_.signal_variance();
      const MatrixXd& Z = *centers_;
      VectorXd inv_ls(input_dim_);
      for (Index k = 0; k < input_dim_; ++k)
        inv_ls[k] = 1.0 / hyper_.lengthscale(k);
      const double sf2 = hyper_.signal_variance();
      for (Index b = 0; b < nc; ++b)
        for (Index a = 0; a < nr; ++a) {
          double q = 0.0;
          for (Index k = 0; k < input_dim_; ++k) {
            const double diff = (Z(rows[a], k) - Z(cols[b], k)) * inv_ls[k];
            q += diff * diff;
          }
          out(a, b) = sf2 * std::exp(-0.5 * q);
          if (rows[a] == cols[b]) out(a, b) += jitter;
        }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

double BasisExpansion::s_diag(Index i) const {
  if (i < 0 || i >= m_) throw std::out_of_range("s_diag: index out of range");
  switch (kind_) {
    case ExpansionKind::kRffSeArd:
      return 1.0;
    case ExpansionKind::kExplicitDictionary:
      return (*dict_s_)[i];
    case ExpansionKind::kInducingPoint:
      return hyper_.signal_variance() * (1.0 + kGramJitterRel);
  }
  throw std::logic_error("unreachable");
}

std::vector<MatrixXd> BasisExpansion::feature_block_grad_hyper(
    const MatrixXd& X, IndexSpan rows, IndexSpan cols) const {
  if (kind_ != ExpansionKind::kRffSeArd)
    throw UnsupportedOperation(
        "feature_block_grad_hyper: analytic feature gradients exist for the "
        "rff_se_ard kind only");
  check_rows(rows, X.rows());
  check_cols(cols);
  require(X.cols() == input_dim_, "feature_block_grad_hyper: data dimension mismatch");
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = static_cast<Index>(cols.size());
  const Index d = input_dim_;

  std::vector<MatrixXd> grads(d + 1, MatrixXd::Zero(nr, nc));
  MatrixXd xs(nr, d);
  for (Index a = 0; a < nr; ++a)
    for (Index k = 0; k < d; ++k)
      xs(a, k) = X(rows[a], k) / hyper_.lengthscale(k);
  const double amp =
      std::sqrt(2.0 * hyper_.signal_variance() / static_cast<double>(m_));

  for (Index b = 0; b < nc; ++b) {
    const Index c = cols[b];
    const VectorXd w = omega(c / 2);
    const VectorXd arg = xs * w;
    // phi = amp * trig(arg), arg = sum_k w_k x_k / l_k.
    // d(arg)/d(log l_k) = -w_k x_k / l_k, d(phi)/d(log sf2) = phi / 2.
    VectorXd trig(nr), dtrig(nr);
    if (c % 2 == 0) {
      trig = arg.array().cos();
      dtrig = -arg.array().sin();
    } else {
      trig = arg.array().sin();
      dtrig = arg.array().cos();
    }
    for (Index k = 0; k < d; ++k)
      grads[k].col(b) = amp * dtrig.array() * (-w[k]) * xs.col(k).array();
    grads[d].col(b) = 0.5 * amp * trig;
  }
  return grads;
}

const VectorXd& BasisExpansion::dictionary_s() const {
  require(kind_ == ExpansionKind::kExplicitDictionary,
          "dictionary_s: not a dictionary expansion");
  return *dict_s_;
}

void BasisExpansion::set_dictionary_s(Index i, double value) const {
  require(kind_ == ExpansionKind::kExplicitDictionary,
          "set_dictionary_s: not a dictionary expansion");
  if (i < 0 || i >= m_) throw std::out_of_range("set_dictionary_s: index");
  require(value > 0 && std::isfinite(value),
          "set_dictionary_s: value must be positive and finite");
  (*dict_s_)[i] = value;
}

}  // namespace qsgp
