#pragma once

// Numerical plumbing shared by the rest of the library: quadrature,
// bracketed root finding, the standard normal, and seeded engines.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace jmix {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (negative generator argument, probability outside (0,1), ...).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when the hypotheses of a mixability result are not met by the
/// supplied families.
class hypothesis_violation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

using Engine = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute tolerance used for every quadrature-backed evaluation.
inline constexpr double kQuadratureTolerance = 1e-10;

namespace detail {

// Boost's rules cache abscissas lazily, so each thread keeps its own.
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  return rule;
}

inline boost::math::quadrature::sinh_sinh<double>& sinh_sinh_rule() {
  thread_local boost::math::quadrature::sinh_sinh<double> rule(12);
  return rule;
}

} // namespace detail

/// Integrates f over [a, b]; either bound may be infinite. Finite intervals
/// use tanh-sinh (robust to endpoint singularities), half-lines exp-sinh and
/// the real line sinh-sinh.
template <class F>
double integrate(F f, double a, double b, double tol = kQuadratureTolerance) {
  if (a == b) {
    return 0.0;
  }
  if (a > b) {
    return -integrate(f, b, a, tol);
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  double error = 0.0;
  double l1 = 0.0;
  auto guarded = [&f](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  if (!lo_inf && !hi_inf) {
    return detail::tanh_sinh_rule().integrate(guarded, a, b, tol, &error, &l1);
  }
  if (lo_inf && hi_inf) {
    return detail::sinh_sinh_rule().integrate(guarded, tol, &error, &l1);
  }
  return detail::exp_sinh_rule().integrate(guarded, a, b, tol, &error, &l1);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Bisection for the point where a nondecreasing function crosses target.
/// [lo, hi] must bracket the crossing. Iterates until the bracket stops
/// shrinking in floating point or its width falls below abs_tol.
template <class F>
double bisect_increasing(F f, double target, double lo, double hi,
                         double abs_tol = 1e-12) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= abs_tol) {
      return mid;
    }
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Inverts a continuous cdf. Bounded supports bisect directly; unbounded
/// sides grow the bracket geometrically from `scale` first.
template <class Cdf>
double invert_cdf(Cdf cdf, double p, double support_lo, double support_hi,
                  double center, double scale) {
  double lo = support_lo;
  double hi = support_hi;
  if (std::isinf(lo)) {
    double step = scale;
    lo = center - step;
    while (cdf(lo) > p) {
      step *= 2.0;
      lo = center - step;
      if (!std::isfinite(lo)) {
        throw domain_error("quantile bracket diverged");
      }
    }
  }
  if (std::isinf(hi)) {
    double step = scale;
    hi = center + step;
    while (cdf(hi) < p) {
      step *= 2.0;
      hi = center + step;
      if (!std::isfinite(hi)) {
        throw domain_error("quantile bracket diverged");
      }
    }
  }
  const double tol = 1e-13 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  return bisect_increasing(cdf, p, lo, hi, tol);
}

/// Draw from the open interval (0, 1).
inline double open_uniform(Engine& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  return u;
}

/// Seed for chunk k of a chunked sampling run.
inline std::uint64_t chunk_seed(std::uint64_t base_seed, std::uint64_t chunk) {
  return base_seed + chunk;
}

inline constexpr std::size_t kChunkSize = 4096;

} // namespace jmix
