#pragma once

#include "jmix/distributions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testing_support {

/// Critical KS distance at alpha = 0.01 for the given sample size.
inline double ks_critical(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// One-sample Kolmogorov-Smirnov distance sup |F_n - F|.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& F) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = F(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Adaptive Gauss-Kronrod, independent of the library's double-exponential rules.
inline double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12);
}

/// Standard normal quantile by bisection on the erfc-based CDF.
inline double normal_quantile_oracle(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Mean and standard error of a sample.
struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  long double s = 0.0L;
  for (double x : xs) s += x;
  const double n = static_cast<double>(xs.size());
  const double mean = static_cast<double>(s / n);
  long double ss = 0.0L;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(static_cast<double>(ss) / (n - 1.0) / n)};
}

} // namespace testing_support
