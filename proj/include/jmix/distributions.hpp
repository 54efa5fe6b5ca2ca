#pragma once

// Univariate families: densities, distribution functions, quantiles,
// samplers and the structural flags the mixability results key on.

#include "jmix/generators.hpp"
#include "jmix/numerics.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace jmix {

/// Standardized symmetric unimodal shapes on which location-scale families
/// can be built without a characteristic generator.
enum class SymmetricShape { uniform, triangular, logistic, laplace };

inline std::string to_string(SymmetricShape s) {
  switch (s) {
  case SymmetricShape::uniform: return "uniform";
  case SymmetricShape::triangular: return "triangular";
  case SymmetricShape::logistic: return "logistic";
  case SymmetricShape::laplace: return "laplace";
  }
  return "unknown";
}

/// Finite law on (0, inf), used for scale mixing (H).
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> weights;

  static DiscreteLaw point_mass(double v) { return DiscreteLaw{{v}, {1.0}}; }
};

inline void validate(const DiscreteLaw& h) {
  if (h.values.empty() || h.values.size() != h.weights.size()) {
    throw domain_error("discrete law needs matching, nonempty values and weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    if (!(h.values[k] > 0.0) || !std::isfinite(h.values[k])) {
      throw domain_error("discrete law atoms must be positive");
    }
    if (!(h.weights[k] > 0.0)) {
      throw domain_error("discrete law weights must be positive");
    }
    total += h.weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw domain_error("discrete law weights must sum to 1");
  }
}

struct LocationScaleSymmetric {
  std::variant<CharacteristicGenerator, SymmetricShape> base;
  double mu;
  double theta;
};

struct Uniform {
  double lo;
  double hi;
};

struct Elliptical1D {
  double mu;
  double sigma;
  CharacteristicGenerator g;
};

/// (2r+1)/(2 a^(2r+1)) x^(2r) on [-a, a].
struct BimodalPower {
  double a;
  int r;
};

/// C_m x^(2m) / sqrt(1 - x^2) on (-1, 1).
struct BimodalMoment {
  int m;
  double norm;
};

/// Finite truncation of sum_m alpha_m f_m with renormalized weights.
struct BimodalMomentMixture {
  std::vector<int> orders;
  std::vector<double> weights;
  std::vector<double> norms;
};

/// C exp(-alpha |x|^beta) / (1 + exp(-|x|^beta))^(2 alpha).
struct GeneralizedLogistic {
  double alpha;
  double beta;
  double norm;
};

/// Density C r^(N-1) exp(-m r^beta) / sigma with r = ((x - mu)/sigma)^2.
struct KotzType {
  double N;
  double m;
  double beta;
  double mu;
  double sigma;
  double norm;
};

struct SkewNormal {
  double mu;
  double sigma;
  double lambda;
};

/// Skew scale mixture of normals with finite mixing law H.
struct SSMN {
  double mu;
  double sigma;
  double lambda;
  DiscreteLaw h;
};

/// X = Z / U^(1/q) + mu with Z ~ E_1(0, sigma^2, g).
struct SlashElliptical1D {
  double mu;
  double sigma;
  CharacteristicGenerator g;
  double q;
};

using FamilyKind =
    std::variant<LocationScaleSymmetric, Uniform, Elliptical1D, BimodalPower, BimodalMoment,
                 BimodalMomentMixture, GeneralizedLogistic, KotzType, SkewNormal, SSMN,
                 SlashElliptical1D>;

struct FamilyFlags {
  bool symmetric = false;
  /// Known unimodal. False means "not known", not "known multimodal".
  bool unimodal = false;
  double support_lo = -kInf;
  double support_hi = kInf;
  /// Symmetry center for symmetric families, location parameter otherwise.
  double center = 0.0;
};

/// One marginal law. Built through the factories in namespace `family`,
/// which validate parameters and resolve normalizing constants.
class UnivariateFamily {
public:
  UnivariateFamily(FamilyKind kind, FamilyFlags flags, double scale)
      : kind_(std::move(kind)), flags_(flags), scale_(scale) {}

  const FamilyKind& kind() const { return kind_; }
  const FamilyFlags& flags() const { return flags_; }
  /// Natural scale parameter; used for brackets and default grids.
  double scale() const { return scale_; }

  std::string name() const;

private:
  FamilyKind kind_;
  FamilyFlags flags_;
  double scale_;
};

namespace detail {

/// Write-once cache of normalizing constants, keyed by family and parameters.
inline double cached_constant(const std::string& key, const std::function<double()>& compute) {
  static std::mutex mutex;
  static std::map<std::string, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) {
      return it->second;
    }
  }
  const double value = compute();
  std::lock_guard lock(mutex);
  return cache.emplace(key, value).first->second;
}

inline std::string param_key(const std::string& tag, std::initializer_list<double> values) {
  std::ostringstream os;
  os.precision(17);
  os << tag;
  for (double v : values) {
    os << '|' << v;
  }
  return os.str();
}

inline double moment_norm(int m) {
  // 1 / B(m + 1/2, 1/2); the integral of x^(2m)/sqrt(1-x^2) over (-1, 1).
  return 1.0 / boost::math::beta(m + 0.5, 0.5);
}

// Standardized elliptical laws (sigma = 1).

inline double ell_pdf(const CharacteristicGenerator& g, double z) {
  return std::visit(
      [z](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return normal_pdf(z);
        } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
          return boost::math::pdf(boost::math::students_t_distribution<double>(k.nu), z);
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return 1.0 / (std::numbers::pi * (1.0 + z * z));
        } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
          const double nu = 2.0 * k.N - 1.0;
          const double s = std::sqrt(k.m / nu);
          return boost::math::pdf(boost::math::students_t_distribution<double>(nu), z / s) / s;
        } else {
          double f = 0.0;
          for (const auto& atom : k.atoms) {
            f += atom.weight * normal_pdf(z / atom.scale) / atom.scale;
          }
          return f;
        }
      },
      g.kind());
}

inline double ell_cdf(const CharacteristicGenerator& g, double z) {
  return std::visit(
      [z](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return normal_cdf(z);
        } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
          return boost::math::cdf(boost::math::students_t_distribution<double>(k.nu), z);
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return 0.5 + std::atan(z) / std::numbers::pi;
        } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
          const double nu = 2.0 * k.N - 1.0;
          const double s = std::sqrt(k.m / nu);
          return boost::math::cdf(boost::math::students_t_distribution<double>(nu), z / s);
        } else {
          double f = 0.0;
          for (const auto& atom : k.atoms) {
            f += atom.weight * normal_cdf(z / atom.scale);
          }
          return f;
        }
      },
      g.kind());
}

inline double ell_quantile(const CharacteristicGenerator& g, double p) {
  return std::visit(
      [&g, p](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return boost::math::quantile(boost::math::normal_distribution<double>(), p);
        } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
          return boost::math::quantile(boost::math::students_t_distribution<double>(k.nu), p);
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return std::tan(std::numbers::pi * (p - 0.5));
        } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
          const double nu = 2.0 * k.N - 1.0;
          const double s = std::sqrt(k.m / nu);
          return s * boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
        } else {
          double smax = 0.0;
          for (const auto& atom : k.atoms) {
            smax = std::max(smax, atom.scale);
          }
          return invert_cdf([&g](double z) { return ell_cdf(g, z); }, p, -kInf, kInf, 0.0, smax);
        }
      },
      g.kind());
}

inline double shape_pdf(SymmetricShape s, double z) {
  const double az = std::abs(z);
  switch (s) {
  case SymmetricShape::uniform: return az <= 1.0 ? 0.5 : 0.0;
  case SymmetricShape::triangular: return az <= 1.0 ? 1.0 - az : 0.0;
  case SymmetricShape::logistic: {
    const double e = std::exp(-az);
    return e / ((1.0 + e) * (1.0 + e));
  }
  case SymmetricShape::laplace: return 0.5 * std::exp(-az);
  }
  return 0.0;
}

inline double shape_cdf(SymmetricShape s, double z) {
  switch (s) {
  case SymmetricShape::uniform: return std::clamp(0.5 * (z + 1.0), 0.0, 1.0);
  case SymmetricShape::triangular:
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return z < 0.0 ? 0.5 * (1.0 + z) * (1.0 + z) : 1.0 - 0.5 * (1.0 - z) * (1.0 - z);
  case SymmetricShape::logistic: return 1.0 / (1.0 + std::exp(-z));
  case SymmetricShape::laplace: return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  }
  return 0.0;
}

inline double shape_quantile(SymmetricShape s, double p) {
  switch (s) {
  case SymmetricShape::uniform: return 2.0 * p - 1.0;
  case SymmetricShape::triangular:
    return p < 0.5 ? -1.0 + std::sqrt(2.0 * p) : 1.0 - std::sqrt(2.0 * (1.0 - p));
  case SymmetricShape::logistic: return std::log(p / (1.0 - p));
  case SymmetricShape::laplace: return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
  }
  return 0.0;
}

inline double skew_normal_std_pdf(double z, double lambda) {
  return 2.0 * normal_pdf(z) * normal_cdf(lambda * z);
}

inline double skew_normal_std_cdf(double z, double lambda) {
  if (lambda == 0.0) {
    return normal_cdf(z);
  }
  if (z < -40.0) return 0.0;
  if (z > 40.0) return 1.0;
  // P(Z <= 0) = 1/2 - atan(lambda)/pi, then integrate the density from 0.
  const double at_zero = 0.5 - std::atan(lambda) / std::numbers::pi;
  const double tail = integrate([lambda](double t) { return skew_normal_std_pdf(t, lambda); },
                                0.0, std::clamp(z, -40.0, 40.0));
  return std::clamp(at_zero + tail, 0.0, 1.0);
}

inline double generalized_logistic_kernel(double alpha, double beta, double x) {
  const double y = std::pow(std::abs(x), beta);
  return std::exp(-alpha * y - 2.0 * alpha * std::log1p(std::exp(-y)));
}

inline double kotz_kernel(double N, double m, double beta, double z) {
  const double r = z * z;
  if (r == 0.0) {
    return N == 1.0 ? 1.0 : 0.0;
  }
  return std::exp((N - 1.0) * std::log(r) - m * std::pow(r, beta));
}

} // namespace detail

namespace family {

inline UnivariateFamily uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw domain_error("uniform requires finite lo < hi");
  }
  const double c = 0.5 * (lo + hi);
  return {Uniform{lo, hi}, FamilyFlags{true, true, lo, hi, c}, 0.5 * (hi - lo)};
}

inline UnivariateFamily location_scale(SymmetricShape shape, double mu, double theta) {
  if (!(theta > 0.0) || !std::isfinite(mu)) {
    throw domain_error("location-scale family requires theta > 0");
  }
  const bool bounded = shape == SymmetricShape::uniform || shape == SymmetricShape::triangular;
  FamilyFlags flags{true, true, bounded ? mu - theta : -kInf, bounded ? mu + theta : kInf, mu};
  return {LocationScaleSymmetric{shape, mu, theta}, flags, theta};
}

inline UnivariateFamily location_scale(const CharacteristicGenerator& g, double mu,
                                       double theta) {
  if (!(theta > 0.0) || !std::isfinite(mu)) {
    throw domain_error("location-scale family requires theta > 0");
  }
  return {LocationScaleSymmetric{g, mu, theta}, FamilyFlags{true, true, -kInf, kInf, mu}, theta};
}

/// E_1(mu, sigma^2, g). Normal variance mixtures are unimodal and symmetric.
inline UnivariateFamily elliptical(double mu, double sigma, const CharacteristicGenerator& g) {
  if (!(sigma > 0.0) || !std::isfinite(mu)) {
    throw domain_error("elliptical family requires sigma > 0");
  }
  return {Elliptical1D{mu, sigma, g}, FamilyFlags{true, true, -kInf, kInf, mu}, sigma};
}

inline UnivariateFamily bimodal_power(double a, int r) {
  if (!(a > 0.0) || r < 1) {
    throw domain_error("bimodal_power requires a > 0 and integer r >= 1");
  }
  return {BimodalPower{a, r}, FamilyFlags{true, false, -a, a, 0.0}, a};
}

inline UnivariateFamily bimodal_moment(int m) {
  if (m < 0) {
    throw domain_error("bimodal_moment requires m >= 0");
  }
  return {BimodalMoment{m, detail::moment_norm(m)}, FamilyFlags{true, false, -1.0, 1.0, 0.0},
          1.0};
}

inline UnivariateFamily bimodal_moment_mixture(std::vector<int> orders,
                                               std::vector<double> weights) {
  if (orders.empty() || orders.size() != weights.size()) {
    throw domain_error("bimodal_moment_mixture needs matching orders and weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    if (orders[k] < 0 || !(weights[k] > 0.0)) {
      throw domain_error("bimodal_moment_mixture needs m >= 0 and positive weights");
    }
    total += weights[k];
  }
  BimodalMomentMixture mix;
  mix.orders = std::move(orders);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    mix.weights.push_back(weights[k] / total);
    mix.norms.push_back(detail::moment_norm(mix.orders[k]));
  }
  return {std::move(mix), FamilyFlags{true, false, -1.0, 1.0, 0.0}, 1.0};
}

/// exp(-alpha y)(1 + e^-y)^(-2 alpha) decreases in y = |x|^beta, so the
/// density is unimodal and symmetric for all alpha, beta > 0.
inline UnivariateFamily generalized_logistic(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw domain_error("generalized_logistic requires alpha, beta > 0");
  }
  const double norm = detail::cached_constant(
      detail::param_key("generalized_logistic", {alpha, beta}), [=] {
        const double half = integrate(
            [=](double x) { return detail::generalized_logistic_kernel(alpha, beta, x); }, 0.0,
            kInf);
        return 1.0 / (2.0 * half);
      });
  return {GeneralizedLogistic{alpha, beta, norm}, FamilyFlags{true, true, -kInf, kInf, 0.0}, 1.0};
}

inline UnivariateFamily kotz(double N, double m, double beta, double mu = 0.0,
                             double sigma = 1.0) {
  if (!(N > 1.0) || !(m > 0.0) || !(beta > 0.0) || !(sigma > 0.0)) {
    throw domain_error("kotz requires N > 1, m > 0, beta > 0, sigma > 0");
  }
  const double norm =
      detail::cached_constant(detail::param_key("kotz", {N, m, beta}), [=] {
        const double half = integrate(
            [=](double z) { return detail::kotz_kernel(N, m, beta, z); }, 0.0, kInf);
        return 1.0 / (2.0 * half);
      });
  return {KotzType{N, m, beta, mu, sigma, norm}, FamilyFlags{true, false, -kInf, kInf, mu},
          sigma};
}

inline UnivariateFamily skew_normal(double mu, double sigma, double lambda) {
  if (!(sigma > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu)) {
    throw domain_error("skew_normal requires sigma > 0 and finite lambda");
  }
  // Skew-normal densities are log-concave, hence unimodal.
  return {SkewNormal{mu, sigma, lambda}, FamilyFlags{lambda == 0.0, true, -kInf, kInf, mu}, sigma};
}

inline UnivariateFamily ssmn(double mu, double sigma, double lambda, DiscreteLaw h) {
  if (!(sigma > 0.0) || !std::isfinite(lambda)) {
    throw domain_error("ssmn requires sigma > 0 and finite lambda");
  }
  validate(h);
  const bool sym = lambda == 0.0;
  return {SSMN{mu, sigma, lambda, std::move(h)}, FamilyFlags{sym, sym, -kInf, kInf, mu}, sigma};
}

inline UnivariateFamily slash(double mu, double sigma, const CharacteristicGenerator& g,
                              double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw domain_error("slash family requires q > 0");
  }
  if (!(sigma > 0.0)) {
    throw domain_error("slash family requires sigma > 0");
  }
  return {SlashElliptical1D{mu, sigma, g, q}, FamilyFlags{true, true, -kInf, kInf, mu}, sigma};
}

} // namespace family

/// Density f(x); zero outside the support.
inline double density(const UnivariateFamily& F, double x) {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          return (x >= k.lo && x <= k.hi) ? 1.0 / (k.hi - k.lo) : 0.0;
        } else if constexpr (std::is_same_v<K, LocationScaleSymmetric>) {
          const double z = std::abs(x - k.mu) / k.theta;
          if (const auto* shape = std::get_if<SymmetricShape>(&k.base)) {
            return detail::shape_pdf(*shape, z) / k.theta;
          }
          return detail::ell_pdf(std::get<CharacteristicGenerator>(k.base), z) / k.theta;
        } else if constexpr (std::is_same_v<K, Elliptical1D>) {
          return detail::ell_pdf(k.g, std::abs(x - k.mu) / k.sigma) / k.sigma;
        } else if constexpr (std::is_same_v<K, BimodalPower>) {
          if (std::abs(x) > k.a) return 0.0;
          const int p = 2 * k.r;
          return (p + 1) / (2.0 * std::pow(k.a, p + 1)) * std::pow(std::abs(x), p);
        } else if constexpr (std::is_same_v<K, BimodalMoment>) {
          const double ax = std::abs(x);
          if (ax >= 1.0) return 0.0;
          return k.norm * std::pow(ax, 2 * k.m) / std::sqrt((1.0 - ax) * (1.0 + ax));
        } else if constexpr (std::is_same_v<K, BimodalMomentMixture>) {
          const double ax = std::abs(x);
          if (ax >= 1.0) return 0.0;
          double f = 0.0;
          for (std::size_t i = 0; i < k.orders.size(); ++i) {
            f += k.weights[i] * k.norms[i] * std::pow(ax, 2 * k.orders[i]);
          }
          return f / std::sqrt((1.0 - ax) * (1.0 + ax));
        } else if constexpr (std::is_same_v<K, GeneralizedLogistic>) {
          return k.norm * detail::generalized_logistic_kernel(k.alpha, k.beta, x);
        } else if constexpr (std::is_same_v<K, KotzType>) {
          const double z = std::abs(x - k.mu) / k.sigma;
          return k.norm * detail::kotz_kernel(k.N, k.m, k.beta, z) / k.sigma;
        } else if constexpr (std::is_same_v<K, SkewNormal>) {
          return detail::skew_normal_std_pdf((x - k.mu) / k.sigma, k.lambda) / k.sigma;
        } else if constexpr (std::is_same_v<K, SSMN>) {
          double f = 0.0;
          for (std::size_t i = 0; i < k.h.values.size(); ++i) {
            const double v = k.h.values[i];
            const double s = k.sigma * v;
            f += k.h.weights[i] * detail::skew_normal_std_pdf((x - k.mu) / s, k.lambda * v) / s;
          }
          return f;
        } else {
          static_assert(std::is_same_v<K, SlashElliptical1D>);
          const double z = std::abs(x - k.mu) / k.sigma;
          const double q = k.q;
          const auto& g = k.g;
          const double val = integrate(
              [&](double u) {
                const double s = std::pow(u, 1.0 / q);
                return s * detail::ell_pdf(g, z * s);
              },
              0.0, 1.0);
          return val / k.sigma;
        }
      },
      F.kind());
}

/// Distribution function F(x).
inline double cdf(const UnivariateFamily& F, double x) {
  if (x <= F.flags().support_lo) return 0.0;
  if (x >= F.flags().support_hi) return 1.0;
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          return (x - k.lo) / (k.hi - k.lo);
        } else if constexpr (std::is_same_v<K, LocationScaleSymmetric>) {
          const double z = (x - k.mu) / k.theta;
          if (const auto* shape = std::get_if<SymmetricShape>(&k.base)) {
            return detail::shape_cdf(*shape, z);
          }
          return detail::ell_cdf(std::get<CharacteristicGenerator>(k.base), z);
        } else if constexpr (std::is_same_v<K, Elliptical1D>) {
          return detail::ell_cdf(k.g, (x - k.mu) / k.sigma);
        } else if constexpr (std::is_same_v<K, BimodalPower>) {
          const int p = 2 * k.r + 1;
          return (std::pow(x, p) + std::pow(k.a, p)) / (2.0 * std::pow(k.a, p));
        } else if constexpr (std::is_same_v<K, BimodalMoment>) {
          const double half = 0.5 * boost::math::ibeta(k.m + 0.5, 0.5, x * x);
          return x < 0.0 ? 0.5 - half : 0.5 + half;
        } else if constexpr (std::is_same_v<K, BimodalMomentMixture>) {
          double half = 0.0;
          for (std::size_t i = 0; i < k.orders.size(); ++i) {
            half += k.weights[i] * 0.5 * boost::math::ibeta(k.orders[i] + 0.5, 0.5, x * x);
          }
          return x < 0.0 ? 0.5 - half : 0.5 + half;
        } else if constexpr (std::is_same_v<K, GeneralizedLogistic>) {
          const double ax = std::abs(x);
          const double half =
              k.norm * integrate(
                           [&k](double t) {
                             return detail::generalized_logistic_kernel(k.alpha, k.beta, t);
                           },
                           0.0, ax);
          return std::clamp(x < 0.0 ? 0.5 - half : 0.5 + half, 0.0, 1.0);
        } else if constexpr (std::is_same_v<K, KotzType>) {
          const double z = (x - k.mu) / k.sigma;
          const double half =
              k.norm * integrate(
                           [&k](double t) { return detail::kotz_kernel(k.N, k.m, k.beta, t); },
                           0.0, std::abs(z));
          return std::clamp(z < 0.0 ? 0.5 - half : 0.5 + half, 0.0, 1.0);
        } else if constexpr (std::is_same_v<K, SkewNormal>) {
          return detail::skew_normal_std_cdf((x - k.mu) / k.sigma, k.lambda);
        } else if constexpr (std::is_same_v<K, SSMN>) {
          double f = 0.0;
          for (std::size_t i = 0; i < k.h.values.size(); ++i) {
            const double v = k.h.values[i];
            f += k.h.weights[i] *
                 detail::skew_normal_std_cdf((x - k.mu) / (k.sigma * v), k.lambda * v);
          }
          return std::clamp(f, 0.0, 1.0);
        } else {
          static_assert(std::is_same_v<K, SlashElliptical1D>);
          const double z = (x - k.mu) / k.sigma;
          const double az = std::abs(z);
          const double q = k.q;
          const auto& g = k.g;
          const double half = integrate(
              [&](double u) { return detail::ell_cdf(g, az * std::pow(u, 1.0 / q)) - 0.5; }, 0.0,
              1.0);
          return std::clamp(z < 0.0 ? 0.5 - half : 0.5 + half, 0.0, 1.0);
        }
      },
      F.kind());
}

/// Inverse distribution function on (0, 1).
inline double quantile(const UnivariateFamily& F, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("quantile requires p in (0, 1)");
  }
  auto numeric = [&F, p]() {
    const auto& fl = F.flags();
    return invert_cdf([&F](double x) { return cdf(F, x); }, p, fl.support_lo, fl.support_hi,
                      fl.center, F.scale());
  };
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          return k.lo + p * (k.hi - k.lo);
        } else if constexpr (std::is_same_v<K, LocationScaleSymmetric>) {
          if (const auto* shape = std::get_if<SymmetricShape>(&k.base)) {
            return k.mu + k.theta * detail::shape_quantile(*shape, p);
          }
          return k.mu +
                 k.theta * detail::ell_quantile(std::get<CharacteristicGenerator>(k.base), p);
        } else if constexpr (std::is_same_v<K, Elliptical1D>) {
          return k.mu + k.sigma * detail::ell_quantile(k.g, p);
        } else if constexpr (std::is_same_v<K, BimodalPower>) {
          const double t = 2.0 * p - 1.0;
          const double mag = k.a * std::pow(std::abs(t), 1.0 / (2 * k.r + 1));
          return t < 0.0 ? -mag : mag;
        } else if constexpr (std::is_same_v<K, BimodalMoment>) {
          const double t = 2.0 * p - 1.0;
          if (t == 0.0) return 0.0;
          const double mag = std::sqrt(boost::math::ibeta_inv(k.m + 0.5, 0.5, std::abs(t)));
          return t < 0.0 ? -mag : mag;
        } else {
          return numeric();
        }
      },
      F.kind());
}

namespace detail {

/// Per-engine draw from a family. Exact representations throughout:
/// normal mixtures, the Henze construction for skew normals, slash ratios,
/// gamma transforms for Kotz laws and rejection for generalized logistic.
class FamilySampler {
public:
  explicit FamilySampler(const UnivariateFamily& F) : F_(F) {
    if (const auto* e = std::get_if<Elliptical1D>(&F.kind())) {
      mixing_.emplace_back(e->g);
    } else if (const auto* s = std::get_if<SlashElliptical1D>(&F.kind())) {
      mixing_.emplace_back(s->g);
    } else if (const auto* l = std::get_if<LocationScaleSymmetric>(&F.kind())) {
      if (const auto* g = std::get_if<CharacteristicGenerator>(&l->base)) {
        mixing_.emplace_back(*g);
      }
    } else if (const auto* h = std::get_if<SSMN>(&F.kind())) {
      pick_ = std::discrete_distribution<std::size_t>(h->h.weights.begin(), h->h.weights.end());
    } else if (const auto* mm = std::get_if<BimodalMomentMixture>(&F.kind())) {
      pick_ = std::discrete_distribution<std::size_t>(mm->weights.begin(), mm->weights.end());
    }
  }

  double operator()(Engine& rng) {
    return std::visit([&](const auto& k) -> double { return draw(k, rng); }, F_.kind());
  }

private:
  static double henze(double lambda, Engine& rng, std::normal_distribution<double>& gauss) {
    const double delta = lambda / std::sqrt(1.0 + lambda * lambda);
    const double u = std::abs(gauss(rng));
    const double v = gauss(rng);
    return delta * u + std::sqrt(1.0 - delta * delta) * v;
  }

  double draw(const Uniform& k, Engine& rng) { return k.lo + (k.hi - k.lo) * open_uniform(rng); }

  double draw(const LocationScaleSymmetric& k, Engine& rng) {
    if (const auto* shape = std::get_if<SymmetricShape>(&k.base)) {
      return k.mu + k.theta * shape_quantile(*shape, open_uniform(rng));
    }
    return k.mu + k.theta * std::sqrt(mixing_.front()(rng)) * gauss_(rng);
  }

  double draw(const Elliptical1D& k, Engine& rng) {
    return k.mu + k.sigma * std::sqrt(mixing_.front()(rng)) * gauss_(rng);
  }

  double draw(const BimodalPower&, Engine& rng) { return quantile(F_, open_uniform(rng)); }
  double draw(const BimodalMoment&, Engine& rng) { return quantile(F_, open_uniform(rng)); }

  double draw(const BimodalMomentMixture& k, Engine& rng) {
    const int m = k.orders[pick_(rng)];
    const double t = 2.0 * open_uniform(rng) - 1.0;
    if (t == 0.0) return 0.0;
    const double mag = std::sqrt(boost::math::ibeta_inv(m + 0.5, 0.5, std::abs(t)));
    return t < 0.0 ? -mag : mag;
  }

  double draw(const GeneralizedLogistic& k, Engine& rng) {
    // Proposal exp(-alpha |x|^beta): alpha |X|^beta ~ Gamma(1/beta, 1).
    std::gamma_distribution<double> gamma(1.0 / k.beta, 1.0);
    for (;;) {
      const double g = gamma(rng);
      const double y = g / k.alpha;
      const double accept = std::exp(-2.0 * k.alpha * std::log1p(std::exp(-y)));
      if (open_uniform(rng) <= accept) {
        const double mag = std::pow(y, 1.0 / k.beta);
        return open_uniform(rng) < 0.5 ? -mag : mag;
      }
    }
  }

  double draw(const KotzType& k, Engine& rng) {
    // m |Z|^(2 beta) ~ Gamma((2N - 1)/(2 beta), 1).
    std::gamma_distribution<double> gamma((2.0 * k.N - 1.0) / (2.0 * k.beta), 1.0);
    const double mag = std::pow(gamma(rng) / k.m, 1.0 / (2.0 * k.beta));
    return k.mu + k.sigma * (open_uniform(rng) < 0.5 ? -mag : mag);
  }

  double draw(const SkewNormal& k, Engine& rng) {
    return k.mu + k.sigma * henze(k.lambda, rng, gauss_);
  }

  double draw(const SSMN& k, Engine& rng) {
    const double v = k.h.values[pick_(rng)];
    return k.mu + k.sigma * v * henze(k.lambda * v, rng, gauss_);
  }

  double draw(const SlashElliptical1D& k, Engine& rng) {
    const double z = k.sigma * std::sqrt(mixing_.front()(rng)) * gauss_(rng);
    return z / std::pow(open_uniform(rng), 1.0 / k.q) + k.mu;
  }

  const UnivariateFamily& F_;
  std::vector<MixingSampler> mixing_;
  std::normal_distribution<double> gauss_;
  std::discrete_distribution<std::size_t> pick_;
};

} // namespace detail

/// `count` i.i.d. draws, reproducible per seed.
inline std::vector<double> sample(const UnivariateFamily& F, std::size_t count,
                                  std::uint64_t seed) {
  if (count == 0) {
    throw domain_error("sample count must be positive");
  }
  Engine rng(seed);
  detail::FamilySampler draw(F);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(draw(rng));
  }
  return out;
}

inline std::string UnivariateFamily::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          os << "uniform(" << k.lo << "," << k.hi << ")";
        } else if constexpr (std::is_same_v<K, LocationScaleSymmetric>) {
          os << "location_scale(";
          if (const auto* s = std::get_if<SymmetricShape>(&k.base)) {
            os << to_string(*s);
          } else {
            os << std::get<CharacteristicGenerator>(k.base).name();
          }
          os << "," << k.mu << "," << k.theta << ")";
        } else if constexpr (std::is_same_v<K, Elliptical1D>) {
          os << "elliptical(" << k.mu << "," << k.sigma << "," << k.g.name() << ")";
        } else if constexpr (std::is_same_v<K, BimodalPower>) {
          os << "bimodal_power(" << k.a << "," << k.r << ")";
        } else if constexpr (std::is_same_v<K, BimodalMoment>) {
          os << "bimodal_moment(" << k.m << ")";
        } else if constexpr (std::is_same_v<K, BimodalMomentMixture>) {
          os << "bimodal_moment_mixture(" << k.orders.size() << " terms)";
        } else if constexpr (std::is_same_v<K, GeneralizedLogistic>) {
          os << "generalized_logistic(" << k.alpha << "," << k.beta << ")";
        } else if constexpr (std::is_same_v<K, KotzType>) {
          os << "kotz(" << k.N << "," << k.m << "," << k.beta << "," << k.mu << "," << k.sigma
             << ")";
        } else if constexpr (std::is_same_v<K, SkewNormal>) {
          os << "skew_normal(" << k.mu << "," << k.sigma << "," << k.lambda << ")";
        } else if constexpr (std::is_same_v<K, SSMN>) {
          os << "ssmn(" << k.mu << "," << k.sigma << "," << k.lambda << ")";
        } else {
          os << "slash(" << k.mu << "," << k.sigma << "," << k.g.name() << "," << k.q << ")";
        }
      },
      kind_);
  return os.str();
}

} // namespace jmix
