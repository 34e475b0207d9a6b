#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "qsgp/dataset.hpp"
#include "qsgp/exact_elbo.hpp"
#include "qsgp/predictor.hpp"

using namespace qsgp;

namespace {

std::vector<Index> iota_idx(Index count) {
  std::vector<Index> v(count);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

}  // namespace

TEST_CASE("predict basics") {
  const Index m = 8;
  auto hyper = Hyperparameters::isotropic(1, 1.0, 1.0, 0.3);
  auto ex = BasisExpansion::rff_se_ard(m, 1, 3, hyper);
  VariationalState state(m, 2);
  VectorXd x(1);
  x << 0.4;

  SUBCASE("zero mean gives zero prediction") {
    auto r = predict(state, ex, x, false);
    CHECK(r.mean == 0.0);
    CHECK(r.variance >= 0.0);
  }

  SUBCASE("collapsed posterior leaves only the noise") {
    for (Index r = 0; r < m; ++r) state.C.set_param(r, r, -40.0);
    auto r = predict(state, ex, x, true, 0.3);
    CHECK(r.mean == 0.0);
    CHECK(r.variance == doctest::Approx(0.3).epsilon(1e-12));
  }

  SUBCASE("variance is never negative") {
    CounterRng rng(rng_key(5, 920));
    for (Index col = 0; col < 2; ++col)
      for (Index row = col; row < m; ++row)
        state.C.set_param(row, col, rng.next_normal());
    for (int t = 0; t < 50; ++t) {
      VectorXd xt(1);
      xt << 10.0 * (rng.next_unit() - 0.5);
      CHECK(predict(state, ex, xt, false).variance >= 0.0);
    }
  }

  SUBCASE("chevron variance agrees with the dense quadratic form") {
    CounterRng rng(rng_key(6, 921));
    for (Index j = 0; j < m; ++j) state.mu[j] = rng.next_normal();
    for (Index col = 0; col < 2; ++col)
      for (Index row = col; row < m; ++row)
        state.C.set_param(row, col, 0.3 * rng.next_normal());
    auto r = predict(state, ex, x, false);
    const VectorXd phi = ex.feature_row(x);
    const MatrixXd dense = state.C.to_dense();
    const double direct = (dense.transpose() * phi).squaredNorm();
    CHECK(r.variance == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r.mean == doctest::Approx(phi.dot(state.mu)).epsilon(1e-12));
  }
}

TEST_CASE("trained conjugate model matches the exact predictive mean") {
  // the Gram system conditioning drives the first-order convergence rate;
  // keep the centers a couple of lengthscales apart
  const Index n = 24;
  auto data = make_sinc_dataset(n, 0.1, 7);
  auto hyper = Hyperparameters::isotropic(1, 0.2, 1.0, 0.2);
  auto ex = BasisExpansion::inducing_point(data.X, hyper);  // centers = X

  TrainConfig config;
  config.m_tilde = n;
  config.n_tilde = n;
  config.n_bar = 0;
  config.chevron_k = n;
  config.iterations = 30000;
  config.log_every = 10000;
  config.enumerate_batches = true;
  config.lr_variational = 0.5;
  config.lr_decay_total = 3.0;
  auto result = train(ex, data.X, data.y, config);
  REQUIRE(!result.interrupted);

  // exact GP predictive mean oracle: k(x)'(K + s2 I)^-1 y over raw kernel
  auto all = iota_idx(n);
  MatrixXd kmat(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      kmat(i, j) = se_ard_kernel(data.X.row(i), data.X.row(j), hyper);
  const VectorXd alpha =
      (kmat + 0.2 * MatrixXd::Identity(n, n)).ldlt().solve(data.y);
  double worst = 0.0;
  for (Index t = 0; t < 10; ++t) {
    VectorXd x(1);
    x << -1.5 + 0.3 * static_cast<double>(t);
    const auto pred = predict(result.state, ex, x, false);
    VectorXd kx(n);
    for (Index i = 0; i < n; ++i)
      kx[i] = se_ard_kernel(data.X.row(i), x, hyper);
    const double exact_mean = kx.dot(alpha);
    worst = std::max(worst,
                     std::abs(pred.mean - exact_mean) /
                         std::max(1e-3, std::abs(exact_mean)));
  }
  CHECK(worst <= 1e-2);
}

TEST_CASE("augmented variance") {
  const Index n = 40;
  auto data = make_sinc_dataset(n, 0.1, 9);
  auto hyper = Hyperparameters::isotropic(1, 0.4, 1.3, 0.05);
  auto ex = BasisExpansion::inducing_point(data.X, hyper);
  TrainConfig config;
  config.m_tilde = 10;
  config.n_tilde = 10;
  config.n_bar = 0;
  config.chevron_k = 4;
  config.iterations = 800;
  config.log_every = 400;
  auto result = train(ex, data.X, data.y, config);
  REQUIRE(!result.interrupted);

  SUBCASE("never below the plain variance, on a grid") {
    for (Index t = 0; t < 40; ++t) {
      VectorXd x(1);
      x << -4.0 + 0.2 * static_cast<double>(t);
      auto r = predict_augmented(result.state, ex, x, 0.05);
      REQUIRE(r.augmented_variance.has_value());
      CHECK(*r.augmented_variance >= r.variance);
    }
  }

  SUBCASE("reverts to the prior variance far from the data") {
    VectorXd x(1);
    x << 40.0;  // k(x) ~ 0 (standardized inputs live within ~2)
    auto r = predict_augmented(result.state, ex, x, 0.05);
    CHECK(std::abs(*r.augmented_variance - 1.3) <= 1e-3);
  }

  SUBCASE("unsupported for non-inducing kinds") {
    auto rff = BasisExpansion::rff_se_ard(8, 1, 3, hyper);
    VariationalState st(8, 0);
    VectorXd x(1);
    x << 0.0;
    CHECK_THROWS_AS(predict_augmented(st, rff, x, 0.05),
                    UnsupportedOperation);
  }
}

TEST_CASE("logistic probability is a proper probability") {
  CHECK(logistic_probability(0.0, 0.0, 21) == doctest::Approx(0.5));
  CHECK(logistic_probability(100.0, 1.0, 21) > 0.0);
  CHECK(logistic_probability(100.0, 1.0, 21) < 1.0);
  CHECK(logistic_probability(-100.0, 1.0, 21) > 0.0);
  // variance pulls the probability toward 1/2
  CHECK(logistic_probability(1.0, 25.0, 101) <
        logistic_probability(1.0, 0.0, 101));
}

TEST_CASE("evaluate") {
  SUBCASE("perfect deterministic gaussian predictions") {
    std::vector<PredictiveResult> preds(3);
    VectorXd y(3);
    y << 0.5, -1.0, 2.0;
    for (Index i = 0; i < 3; ++i) preds[static_cast<std::size_t>(i)] = {y[i], 0.0, {}};
    auto m = evaluate(preds, y, Likelihood::kGaussian,
                      1.0 / (2.0 * std::numbers::pi));
    CHECK(m.rmse == doctest::Approx(0.0));
    CHECK(m.mnlp == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("three-point gaussian case against a hand sum") {
    std::vector<PredictiveResult> preds = {
        {0.2, 0.1, {}}, {-0.4, 0.3, {}}, {1.0, 0.05, {}}};
    VectorXd y(3);
    y << 0.0, -1.0, 1.2;
    const double s2 = 0.5;
    double hand = 0.0;
    for (Index i = 0; i < 3; ++i) {
      const auto& p = preds[static_cast<std::size_t>(i)];
      const double var = p.variance + s2;
      hand += 0.5 * std::log(2.0 * std::numbers::pi * var) +
              (y[i] - p.mean) * (y[i] - p.mean) / (2.0 * var);
    }
    auto m = evaluate(preds, y, Likelihood::kGaussian, s2);
    CHECK(m.mnlp == doctest::Approx(hand / 3.0).epsilon(1e-12));
  }

  SUBCASE("random signs on balanced labels sit near chance") {
    const Index n = 4000;
    CounterRng rng(rng_key(11, 922));
    std::vector<PredictiveResult> preds;
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = (i % 2 == 0) ? 1.0 : -1.0;
      preds.push_back({rng.next_normal(), 0.5, {}});
    }
    auto m = evaluate(preds, y, Likelihood::kLogistic, 1.0, 21);
    const double sd = 0.5 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m.accuracy - 0.5) <= 3.0 * sd + 1e-9);
  }

  SUBCASE("empty input is rejected") {
    std::vector<PredictiveResult> preds;
    VectorXd y(0);
    CHECK_THROWS_AS(evaluate(preds, y, Likelihood::kGaussian, 1.0),
                    std::invalid_argument);
  }
}
