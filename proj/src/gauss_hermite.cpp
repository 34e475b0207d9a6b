#include "qsgp/gauss_hermite.hpp"

#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace qsgp {

namespace {

GaussHermite compute(int n) {
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // recurrence He_{k+1}(x) = x He_k(x) - k He_{k-1}(x): zero diagonal,
  // off-diagonal sqrt(k). Weights are the squared first components of the
  // normalized eigenvectors (zeroth moment of N(0,1) is 1).
  MatrixXd jacobi = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw NumericError("Gauss-Hermite eigendecomposition failed");
  GaussHermite rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

const GaussHermite& GaussHermite::get(int n) {
  require(n >= 1, "Gauss-Hermite rule needs at least one point");
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace qsgp
