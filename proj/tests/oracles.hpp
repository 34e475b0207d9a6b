#pragma once

// Test-only oracles, independent of the implementation paths they check:
// golden-section minimization, central finite differences, brute-force
// z-grid integration and a streaming mean/variance accumulator.

#include <cmath>
#include <functional>
#include <vector>

#include "qsgp/common.hpp"

namespace oracles {

// Golden-section search for the minimizer of f on [lo, hi] (unimodal f).
// The argmin precision of a value-comparison search is limited by the
// rounding noise of f near its flat minimum (~sqrt(eps_f)); evaluate f in
// long double when 1e-8 agreement is required.
template <class Scalar = double, class F>
Scalar golden_section_min(const F& f, Scalar lo, Scalar hi,
                          Scalar tol = Scalar(1e-12), int max_iter = 400) {
  const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  Scalar a = lo, b = hi;
  Scalar c = b - inv_phi * (b - a);
  Scalar d = a + inv_phi * (b - a);
  Scalar fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / Scalar(2);
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x0,
                           double step = 1e-5) {
  return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

// Brute-force trapezoid integration of f(z) N(z|0,1) dz over [lo, hi].
inline double gaussian_grid_expectation(const std::function<double(double)>& f,
                                        double lo = -8.0, double hi = 8.0,
                                        int points = 1000001) {
  const double h = (hi - lo) / (points - 1);
  const double norm = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double z = lo + h * i;
    const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    acc += w * f(z) * norm * std::exp(-0.5 * z * z);
  }
  return acc * h;
}

// Streaming mean / standard error (Welford).
class MeanAccumulator {
 public:
  void add(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double std_error() const {
    return std::sqrt(variance() / static_cast<double>(count_));
  }
  double z_score(double reference) const {
    const double se = std_error();
    return se > 0 ? (mean_ - reference) / se : 0.0;
  }
  long long count() const { return count_; }

 private:
  long long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace oracles
