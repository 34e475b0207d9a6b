#include "qsgp/sites.hpp"

#include <cmath>

namespace qsgp {

namespace {
// log(1 + exp(t)) without overflow.
double softplus(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}
}  // namespace

SiteProjection::SiteProjection(Likelihood likelihood, VectorXd targets,
                               double scale)
    : likelihood_(likelihood), y_(std::move(targets)), scale_(scale) {
  require(y_.allFinite(), "site targets must be finite");
  if (likelihood_ == Likelihood::kLogistic) {
    for (Index l = 0; l < y_.size(); ++l)
      require(y_[l] == 1.0 || y_[l] == -1.0,
              "logistic targets must be -1 or +1");
  } else {
    require(scale_ > 0 && std::isfinite(scale_),
            "site scale must be positive and finite");
  }
}

double SiteProjection::log_g(Index row, double u) const {
  const double y = y_[row];
  switch (likelihood_) {
    case Likelihood::kGaussian: {
      const double r = y - u;
      return -0.5 * std::log(2.0 * std::numbers::pi * scale_) -
             r * r / (2.0 * scale_);
    }
    case Likelihood::kLaplace:
      return -std::log(2.0 * scale_) - std::abs(y - u) / scale_;
    case Likelihood::kLogistic:
      return -softplus(-y * u);
  }
  throw std::logic_error("unreachable");
}

double SiteProjection::dlog_g_du(Index row, double u) const {
  const double y = y_[row];
  switch (likelihood_) {
    case Likelihood::kGaussian:
      return (y - u) / scale_;
    case Likelihood::kLaplace: {
      const double r = y - u;
      if (r == 0.0) return 0.0;  // subgradient at the kink
      return (r > 0 ? 1.0 : -1.0) / scale_;
    }
    case Likelihood::kLogistic:
      // y * sig(-y u)
      return y / (1.0 + std::exp(y * u));
  }
  throw std::logic_error("unreachable");
}

double SiteProjection::dlog_g_dlog_scale(Index row, double u) const {
  const double y = y_[row];
  switch (likelihood_) {
    case Likelihood::kGaussian: {
      const double r = y - u;
      return -0.5 + r * r / (2.0 * scale_);
    }
    case Likelihood::kLaplace:
      return -1.0 + std::abs(y - u) / scale_;
    case Likelihood::kLogistic:
      return 0.0;
  }
  throw std::logic_error("unreachable");
}

const char* likelihood_name(Likelihood lik) {
  switch (lik) {
    case Likelihood::kGaussian: return "gaussian";
    case Likelihood::kLaplace: return "laplace";
    case Likelihood::kLogistic: return "logistic";
  }
  throw std::logic_error("unreachable");
}

Likelihood likelihood_from_name(const std::string& name) {
  if (name == "gaussian") return Likelihood::kGaussian;
  if (name == "laplace") return Likelihood::kLaplace;
  if (name == "logistic") return Likelihood::kLogistic;
  throw std::invalid_argument("unknown likelihood: " + name);
}

}  // namespace qsgp
