#include "qsgp/predictor.hpp"

#include <cmath>

#include "qsgp/gauss_hermite.hpp"

namespace qsgp {

PredictiveResult predict(const VariationalState& state,
                         const BasisExpansion& ex, const VectorXd& x,
                         bool include_noise, double sigma_sq) {
  require(x.size() == ex.input_dim(), "predict: dimension mismatch");
  require(state.mu.size() == ex.m(), "predict: state size mismatch");
  const VectorXd phi = ex.feature_row(x);
  PredictiveResult out;
  out.mean = phi.dot(state.mu);
  out.variance = state.C.quadratic_form(phi);
  if (include_noise) {
    require(sigma_sq >= 0, "predict: sigma_sq must be >= 0");
    out.variance += sigma_sq;
  }
  return out;
}

PredictiveResult predict_augmented(const VariationalState& state,
                                   const BasisExpansion& ex, const VectorXd& x,
                                   double sigma_sq) {
  if (ex.kind() != ExpansionKind::kInducingPoint)
    throw UnsupportedOperation(
        "predict_augmented: derived for inducing-point expansions only");
  require(sigma_sq > 0, "predict_augmented: sigma_sq must be positive");
  PredictiveResult out = predict(state, ex, x, false);
  const VectorXd kvec = ex.feature_row(x);  // k(x, z_i)
  const double kss = se_ard_kernel(x, x, ex.hyper());
  out.augmented_variance =
      out.variance +
      sigma_sq * kss * kss / (kvec.squaredNorm() + sigma_sq * kss);
  return out;
}

double logistic_probability(double latent_mean, double latent_variance,
                            int quad_points) {
  require(latent_variance >= 0, "logistic_probability: variance must be >= 0");
  require(quad_points >= 1, "logistic_probability: quad_points must be >= 1");
  const double sd = std::sqrt(latent_variance);
  const GaussHermite& rule = GaussHermite::get(quad_points);
  double p = 0.0;
  for (Index q = 0; q < rule.nodes.size(); ++q) {
    const double f = latent_mean + rule.nodes[q] * sd;
    p += rule.weights[q] / (1.0 + std::exp(-f));
  }
  return std::clamp(p, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon());
}

EvalMetrics evaluate(const std::vector<PredictiveResult>& predictions,
                     const VectorXd& targets, Likelihood likelihood,
                     double scale, int quad_points) {
  require(!predictions.empty(), "evaluate: empty input");
  require(static_cast<Index>(predictions.size()) == targets.size(),
          "evaluate: prediction/target size mismatch");
  const auto n = static_cast<double>(targets.size());

  EvalMetrics out;
  double sq_err = 0.0;
  double nlp = 0.0;
  double correct = 0.0;
  for (Index i = 0; i < targets.size(); ++i) {
    const auto& pr = predictions[static_cast<std::size_t>(i)];
    const double y = targets[i];
    const double resid = y - pr.mean;
    sq_err += resid * resid;
    switch (likelihood) {
      case Likelihood::kGaussian: {
        const double var = pr.variance + scale;
        nlp += 0.5 * std::log(2.0 * std::numbers::pi * var) +
               resid * resid / (2.0 * var);
        break;
      }
      case Likelihood::kLaplace: {
        // E_f[Laplace(y | f, b)] over the latent Gaussian, by quadrature
        const double sd = std::sqrt(pr.variance);
        const GaussHermite& rule = GaussHermite::get(quad_points);
        double dens = 0.0;
        for (Index q = 0; q < rule.nodes.size(); ++q) {
          const double f = pr.mean + rule.nodes[q] * sd;
          dens += rule.weights[q] *
                  std::exp(-std::abs(y - f) / scale) / (2.0 * scale);
        }
        nlp += -std::log(std::max(dens, 1e-300));
        break;
      }
      case Likelihood::kLogistic: {
        require(y == 1.0 || y == -1.0, "evaluate: logistic targets are +-1");
        const double p_pos =
            logistic_probability(pr.mean, pr.variance, quad_points);
        nlp += -std::log(y > 0 ? p_pos : 1.0 - p_pos);
        // median of the predictive sigmoid is the sigmoid at the latent
        // mean, so the median class decision is the sign of the mean
        const double decision = pr.mean >= 0 ? 1.0 : -1.0;
        if (decision == y) correct += 1.0;
        break;
      }
    }
  }
  out.rmse = std::sqrt(sq_err / n);
  out.mnlp = nlp / n;
  if (likelihood == Likelihood::kLogistic) {
    out.accuracy = correct / n;
    out.has_accuracy = true;
  }
  return out;
}

}  // namespace qsgp
