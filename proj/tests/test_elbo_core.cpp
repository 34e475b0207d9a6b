#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "qsgp/exact_elbo.hpp"
#include "qsgp/gauss_hermite.hpp"

using namespace qsgp;

namespace {

struct DenseInstance {
  MatrixXd Phi, S, C;
  VectorXd y, mu;
  double sigma_sq;
};

DenseInstance random_instance(Index n, Index m, std::uint64_t seed,
                              double sigma_sq = 0.5) {
  CounterRng rng(rng_key(seed, 902));
  DenseInstance inst;
  inst.sigma_sq = sigma_sq;
  inst.Phi = MatrixXd(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) inst.Phi(i, j) = rng.next_normal();
  MatrixXd A(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) A(i, j) = rng.next_normal();
  inst.S = A * A.transpose() / static_cast<double>(m) +
           MatrixXd::Identity(m, m);
  inst.y = VectorXd(n);
  for (Index i = 0; i < n; ++i) inst.y[i] = rng.next_normal();
  inst.mu = VectorXd(m);
  for (Index j = 0; j < m; ++j) inst.mu[j] = 0.5 * rng.next_normal();
  inst.C = MatrixXd::Zero(m, m);
  for (Index c = 0; c < m; ++c) {
    inst.C(c, c) = 0.3 + rng.next_unit();
    for (Index r = c + 1; r < m; ++r) inst.C(r, c) = 0.2 * rng.next_normal();
  }
  return inst;
}

}  // namespace

TEST_CASE("exact_elbo at neutral inputs") {
  const Index m = 4;
  MatrixXd Phi(0, m);
  VectorXd y(0);
  auto t = exact_elbo(Phi, MatrixXd::Identity(m, m), y, 1.0, VectorXd::Zero(m),
                      MatrixXd::Identity(m, m));
  CHECK(t.l_mu == 0.0);
  CHECK(t.l_sigma == doctest::Approx(4.0));
  CHECK(t.l_const == doctest::Approx(-4.0));
  CHECK(t.elbo == doctest::Approx(0.0));
}

TEST_CASE("l_mu vanishes at mu = 0") {
  auto inst = random_instance(6, 4, 1);
  auto t = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq,
                      VectorXd::Zero(4), inst.C);
  CHECK(t.l_mu == 0.0);
}

TEST_CASE("bound is tight at the exact posterior") {
  auto inst = random_instance(6, 4, 2);
  auto [mu_star, sigma_star] =
      exact_posterior(inst.Phi, inst.S, inst.y, inst.sigma_sq);
  Eigen::LLT<MatrixXd> llt(sigma_star);
  REQUIRE(llt.info() == Eigen::Success);
  MatrixXd C = llt.matrixL();
  auto t = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, mu_star, C);
  const double lml = exact_log_marginal(inst.Phi, inst.S, inst.y, inst.sigma_sq);
  CHECK(std::abs(t.elbo - lml) <= 1e-8);

  // any other variational setting stays below the marginal likelihood
  auto t2 = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu, inst.C);
  CHECK(t2.elbo <= lml + 1e-10);
}

TEST_CASE("exact_posterior properties") {
  auto inst = random_instance(6, 4, 3);

  SUBCASE("zero data gives zero mean") {
    auto [mu, sigma] =
        exact_posterior(inst.Phi, inst.S, VectorXd::Zero(6), inst.sigma_sq);
    CHECK(mu.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }

  SUBCASE("zero features recover the prior") {
    MatrixXd zero_phi = MatrixXd::Zero(6, 4);
    auto [mu, sigma] = exact_posterior(zero_phi, inst.S, inst.y, inst.sigma_sq);
    MatrixXd prior_cov = inst.S.llt().solve(MatrixXd::Identity(4, 4));
    CHECK((sigma - prior_cov).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("elbo gradient wrt mu vanishes at the posterior mean") {
    auto [mu_star, sigma_star] =
        exact_posterior(inst.Phi, inst.S, inst.y, inst.sigma_sq);
    Eigen::LLT<MatrixXd> llt(sigma_star);
    MatrixXd C = llt.matrixL();
    double worst = 0.0;
    for (Index k = 0; k < 4; ++k) {
      auto f = [&](double delta) {
        VectorXd mu = mu_star;
        mu[k] += delta;
        return exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, mu, C).elbo;
      };
      worst = std::max(worst, std::abs(oracles::central_diff(f, 0.0, 1e-6)));
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("exact_elbo input validation") {
  auto inst = random_instance(5, 3, 4);
  MatrixXd bad_c = inst.C;
  bad_c(1, 1) = -1.0;
  CHECK_THROWS_AS(
      exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu, bad_c),
      InvalidState);
  MatrixXd bad_s = -MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(
      exact_elbo(inst.Phi, bad_s, inst.y, inst.sigma_sq, inst.mu, inst.C),
      NumericError);
}

TEST_CASE("additive separability of the exact terms") {
  auto inst = random_instance(6, 4, 5);
  auto base = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu, inst.C);
  VectorXd mu2 = inst.mu;
  mu2[2] += 0.37;
  auto pert_mu = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, mu2, inst.C);
  CHECK(pert_mu.l_sigma == base.l_sigma);
  CHECK(pert_mu.l_const == base.l_const);
  CHECK(pert_mu.l_mu != base.l_mu);
  MatrixXd c2 = inst.C;
  c2(3, 1) += 0.21;
  auto pert_c = exact_elbo(inst.Phi, inst.S, inst.y, inst.sigma_sq, inst.mu, c2);
  CHECK(pert_c.l_mu == base.l_mu);
  CHECK(pert_c.l_const == base.l_const);
  CHECK(pert_c.l_sigma != base.l_sigma);
}

TEST_CASE("site log factors") {
  VectorXd yb(1);

  SUBCASE("logistic at the symmetric point") {
    yb << 1.0;
    SiteProjection site(Likelihood::kLogistic, yb);
    CHECK(site.log_g(0, 0.0) == doctest::Approx(-std::log(2.0)));
    // overflow safety far in the tails
    CHECK(std::isfinite(site.log_g(0, -5000.0)));
    CHECK(site.log_g(0, 5000.0) == doctest::Approx(0.0));
  }

  SUBCASE("laplace zero residual") {
    yb << 0.7;
    SiteProjection site(Likelihood::kLaplace, yb, 0.5);
    CHECK(site.log_g(0, 0.7) == doctest::Approx(0.0));
  }

  SUBCASE("gaussian zero residual") {
    yb << -0.2;
    SiteProjection site(Likelihood::kGaussian, yb, 1.0);
    CHECK(site.log_g(0, -0.2) ==
          doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
  }

  SUBCASE("invalid logistic targets") {
    yb << 0.5;
    CHECK_THROWS_AS(SiteProjection(Likelihood::kLogistic, yb),
                    std::invalid_argument);
  }
}

TEST_CASE("site log-concavity probe") {
  for (auto lik : {Likelihood::kGaussian, Likelihood::kLaplace,
                   Likelihood::kLogistic}) {
    VectorXd yb(1);
    yb << (lik == Likelihood::kLogistic ? 1.0 : 0.4);
    SiteProjection site(lik, yb, 0.8);
    CounterRng rng(rng_key(17, 903));
    for (int t = 0; t < 1000; ++t) {
      const double u1 = 6.0 * (rng.next_unit() - 0.5);
      const double u2 = 6.0 * (rng.next_unit() - 0.5);
      const double mid = site.log_g(0, 0.5 * (u1 + u2));
      const double ends = 0.5 * (site.log_g(0, u1) + site.log_g(0, u2));
      CHECK(mid >= ends - 1e-12);
    }
  }
}

TEST_CASE("gauss-hermite rule sanity") {
  const auto& rule = GaussHermite::get(21);
  CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // moments of N(0,1)
  double m2 = 0, m4 = 0;
  for (Index i = 0; i < 21; ++i) {
    m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    m4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
  }
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("expected_log_lik_1d") {
  SUBCASE("degenerate variance hits log g exactly") {
    VectorXd yb(1);
    yb << 1.0;
    SiteProjection site(Likelihood::kLogistic, yb);
    for (int q : {1, 2, 101})
      CHECK(expected_log_lik_1d(site, 0, 0.3, 0.0, q) ==
            doctest::Approx(site.log_g(0, 0.3)).epsilon(1e-15));
  }

  SUBCASE("gaussian site is exact with two or more points") {
    VectorXd yb(1);
    yb << 0.8;
    SiteProjection site(Likelihood::kGaussian, yb, 0.7);
    const double a = 0.4, v = 0.9;
    const double q2 = expected_log_lik_1d(site, 0, a, v, 2);
    const double q101 = expected_log_lik_1d(site, 0, a, v, 101);
    CHECK(std::abs(q2 - q101) <= 1e-12);
    // analytic: -log(2 pi s2)/2 - ((y-a)^2 + v^2)/(2 s2)
    const double analytic = -0.5 * std::log(2.0 * std::numbers::pi * 0.7) -
                            ((0.8 - a) * (0.8 - a) + v * v) / (2.0 * 0.7);
    CHECK(q101 == doctest::Approx(analytic).epsilon(1e-12));
  }

  SUBCASE("logistic site against brute-force z-grid integration") {
    CounterRng rng(rng_key(23, 904));
    VectorXd yb(3);
    yb << 1.0, -1.0, 1.0;
    SiteProjection site(Likelihood::kLogistic, yb);
    for (Index row = 0; row < 3; ++row) {
      const double a = rng.next_normal();
      const double v = 0.5 + rng.next_unit();
      const double quad = expected_log_lik_1d(site, row, a, v, 101);
      const double brute = oracles::gaussian_grid_expectation(
          [&](double z) { return site.log_g(row, a + z * v); });
      CHECK(std::abs(quad - brute) <= 1e-6);
    }
  }
}
