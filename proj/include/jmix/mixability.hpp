#pragma once

// Three-valued mixability verdicts with replayable certificates.
// Sufficient conditions only ever emit JM, necessary ones only NotJM; the
// location-scale scale inequality is the one two-sided criterion.

#include "jmix/distributions.hpp"
#include "jmix/generators.hpp"
#include "jmix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace jmix {

enum class Verdict { JM, NotJM, Unknown };

inline std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::JM: return "JM";
  case Verdict::NotJM: return "NotJM";
  case Verdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

/// sum(scales) >= 2 max(scales). `iff` marks that failure implies NotJM.
struct ScaleInequalityCert {
  std::vector<double> scales;
  double sum = 0.0;
  double twice_max = 0.0;
  bool iff = false;
};

/// 2n+1 symmetric laws on [-a, a]: NotJM when every F_i(n a/(n+1)) <= (n+1)/(2n+1).
struct BoundedSymmetricCert {
  double a = 0.0;
  int n = 0;
  double point = 0.0;
  std::vector<double> cdf_values;
  double threshold = 0.0;
  /// Necessary condition for JM: some P(|X_i| <= n a/(n+1)) > 1/(2n+1).
  bool necessary_condition_holds = false;
};

/// 2n+1 symmetric laws on R: NotJM when for some a every
/// F_i(a) - F_i(n a/(n+1)) >= n/(2n+1).
struct UnboundedSymmetricCert {
  int n = 0;
  std::optional<double> witness_a;
  /// The witness, or the grid point with the largest minimal mass.
  double probe_a = 0.0;
  std::vector<double> masses;
  double threshold = 0.0;
  std::size_t grid_size = 0;
};

/// Skew-normal bound with Y ~ SN(0, 1, |lambda|): NotJM when
/// F_Y(n E Y) + (n - 1) P(Y < 0) < 1.
struct SkewNormalCert {
  int n = 0;
  double lambda = 0.0;
  double mean = 0.0;
  double cdf_at_n_mean = 0.0;
  double negative_mass = 0.0;
  double bound = 0.0;
};

struct SsmnCert {
  int n = 0;
  double lambda = 0.0;
  std::vector<double> atoms;
  std::vector<SkewNormalCert> per_atom;
};

struct OracleEvidenceCert {
  int m = 0;
  int n = 0;
  double spread = 0.0;
  double stddev = 0.0;
  int restarts = 0;
  std::vector<double> variance_trajectory;
};

using Certificate = std::variant<std::monostate, ScaleInequalityCert, BoundedSymmetricCert,
                                 UnboundedSymmetricCert, SkewNormalCert, SsmnCert,
                                 OracleEvidenceCert>;

struct MixabilityVerdict {
  Verdict verdict = Verdict::Unknown;
  std::optional<double> joint_center;
  Certificate certificate;
  std::string note;
};

namespace detail {

inline void require_positive(std::span<const double> values, const char* what) {
  if (values.empty()) {
    throw domain_error(std::string(what) + " must be nonempty");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw domain_error(std::string(what) + " must be positive and finite");
    }
  }
}

inline double scale_sum(std::span<const double> s) {
  double total = 0.0;
  for (double v : s) total += v;
  return total;
}

inline double scale_twice_max(std::span<const double> s) {
  return 2.0 * *std::max_element(s.begin(), s.end());
}

inline double bounded_threshold(int n) { return (n + 1.0) / (2.0 * n + 1.0); }
inline double unbounded_threshold(int n) { return n / (2.0 * n + 1.0); }

// Both symmetric certificates compare strictly: the counting argument needs
// P(|X_i| > na/(n+1)) > 2n/(2n+1), and equality is attained by the arcsine
// law, which is n-CM for every n.
inline bool bounded_fires(const BoundedSymmetricCert& c) {
  const double t = bounded_threshold(c.n);
  return !c.cdf_values.empty() &&
         std::all_of(c.cdf_values.begin(), c.cdf_values.end(), [t](double v) { return v < t; });
}

inline bool unbounded_fires(const UnboundedSymmetricCert& c) {
  const double t = unbounded_threshold(c.n);
  return c.witness_a.has_value() && !c.masses.empty() &&
         std::all_of(c.masses.begin(), c.masses.end(), [t](double v) { return v > t; });
}

inline double skew_normal_bound(const SkewNormalCert& c) {
  return c.cdf_at_n_mean + (c.n - 1) * c.negative_mass;
}

inline bool skew_normal_fires(const SkewNormalCert& c) { return skew_normal_bound(c) < 1.0; }

inline int odd_half(std::size_t count) {
  if (count < 3 || count % 2 == 0) {
    throw domain_error("certificate needs an odd number 2n+1 >= 3 of distributions");
  }
  return static_cast<int>((count - 1) / 2);
}

} // namespace detail

/// Non-strict scale (polygon) inequality, compared exactly.
inline bool check_scale_inequality(std::span<const double> scales) {
  detail::require_positive(scales, "scales");
  return detail::scale_sum(scales) >= detail::scale_twice_max(scales);
}

inline ScaleInequalityCert make_scale_certificate(std::span<const double> scales, bool iff) {
  detail::require_positive(scales, "scales");
  return ScaleInequalityCert{std::vector<double>(scales.begin(), scales.end()),
                             detail::scale_sum(scales), detail::scale_twice_max(scales), iff};
}

/// Marginals F_i(x) = F((x - mu_i)/theta_i) from one unimodal-symmetric base:
/// JM exactly when the scale inequality holds.
inline MixabilityVerdict jm_verdict_unimodal_location_scale(const UnivariateFamily& base,
                                                            std::span<const double> theta,
                                                            std::span<const double> mu) {
  if (theta.size() != mu.size()) {
    throw domain_error("theta and mu must have equal length");
  }
  MixabilityVerdict out;
  if (!base.flags().symmetric || !base.flags().unimodal) {
    out.verdict = Verdict::Unknown;
    out.note = "hypothesis violated: base is not known unimodal-symmetric";
    return out;
  }
  auto cert = make_scale_certificate(theta, true);
  if (cert.sum >= cert.twice_max) {
    out.verdict = Verdict::JM;
    double center = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      center += mu[i] + theta[i] * base.flags().center;
    }
    out.joint_center = center;
  } else {
    out.verdict = Verdict::NotJM;
  }
  out.certificate = std::move(cert);
  return out;
}

/// E_1(mu_i, sigma_i^2, g): JM under the scale inequality. When it fails the
/// marginals are unimodal-symmetric members of one location-scale family, so
/// the verdict is NotJM; otherwise it would be Unknown.
inline MixabilityVerdict jm_verdict_elliptical(std::span<const double> sigma,
                                               std::span<const double> mu,
                                               const CharacteristicGenerator& g) {
  if (sigma.size() != mu.size()) {
    throw domain_error("sigma and mu must have equal length");
  }
  const auto standard = family::elliptical(0.0, 1.0, g);
  const bool unimodal = standard.flags().unimodal && standard.flags().symmetric;
  auto cert = make_scale_certificate(sigma, unimodal);
  MixabilityVerdict out;
  if (cert.sum >= cert.twice_max) {
    out.verdict = Verdict::JM;
    double center = 0.0;
    for (double m : mu) center += m;
    out.joint_center = center;
  } else {
    out.verdict = unimodal ? Verdict::NotJM : Verdict::Unknown;
  }
  out.certificate = std::move(cert);
  return out;
}

/// Bounded-support certificate for 2n+1 laws symmetric about 0 on [-a, a].
inline MixabilityVerdict not_jm_bounded_symmetric(const std::vector<UnivariateFamily>& families,
                                                  double a) {
  if (!(a > 0.0)) {
    throw domain_error("a must be positive");
  }
  const int n = detail::odd_half(families.size());
  for (const auto& F : families) {
    const auto& fl = F.flags();
    if (!fl.symmetric || fl.center != 0.0) {
      throw hypothesis_violation(F.name() + " is not symmetric about 0");
    }
    if (fl.support_lo < -a || fl.support_hi > a) {
      throw hypothesis_violation(F.name() + " has support outside [-a, a]");
    }
  }
  BoundedSymmetricCert cert;
  cert.a = a;
  cert.n = n;
  cert.point = n * a / (n + 1.0);
  cert.threshold = detail::bounded_threshold(n);
  const double mass_needed = 1.0 / (2.0 * n + 1.0);
  for (const auto& F : families) {
    const double v = cdf(F, cert.point);
    cert.cdf_values.push_back(v);
    if (2.0 * v - 1.0 > mass_needed) {
      cert.necessary_condition_holds = true;
    }
  }
  MixabilityVerdict out;
  out.verdict = detail::bounded_fires(cert) ? Verdict::NotJM : Verdict::Unknown;
  out.certificate = std::move(cert);
  return out;
}

/// 64 log-spaced points over [min scale / 10, 10 max scale].
inline std::vector<double> default_a_grid(const std::vector<UnivariateFamily>& families,
                                          int points = 64) {
  double smin = kInf;
  double smax = 0.0;
  for (const auto& F : families) {
    smin = std::min(smin, F.scale());
    smax = std::max(smax, F.scale());
  }
  const double lo = std::log(smin / 10.0);
  const double hi = std::log(10.0 * smax);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) {
    grid.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
  }
  return grid;
}

/// Unbounded-support certificate, searched over a finite grid of a values.
/// The first grid point that fires is stored as the witness.
inline MixabilityVerdict not_jm_unbounded_symmetric(const std::vector<UnivariateFamily>& families,
                                                    const std::vector<double>& a_grid) {
  const int n = detail::odd_half(families.size());
  for (const auto& F : families) {
    if (!F.flags().symmetric || F.flags().center != 0.0) {
      throw hypothesis_violation(F.name() + " is not symmetric about 0");
    }
  }
  UnboundedSymmetricCert cert;
  cert.n = n;
  cert.threshold = detail::unbounded_threshold(n);
  cert.grid_size = a_grid.size();
  double best_min = -kInf;
  for (double a : a_grid) {
    if (!(a > 0.0)) {
      throw domain_error("a grid values must be positive");
    }
    std::vector<double> masses;
    for (const auto& F : families) {
      masses.push_back(cdf(F, a) - cdf(F, n * a / (n + 1.0)));
    }
    const double lowest = *std::min_element(masses.begin(), masses.end());
    if (lowest > cert.threshold) {
      cert.witness_a = a;
      cert.probe_a = a;
      cert.masses = std::move(masses);
      break;
    }
    if (lowest > best_min) {
      best_min = lowest;
      cert.probe_a = a;
      cert.masses = std::move(masses);
    }
  }
  MixabilityVerdict out;
  out.verdict = detail::unbounded_fires(cert) ? Verdict::NotJM : Verdict::Unknown;
  out.certificate = std::move(cert);
  return out;
}

/// Evaluates the skew-normal non-mixability bound for n copies of SN(., ., lambda).
inline SkewNormalCert skew_normal_bound_terms(int n, double lambda) {
  if (n < 2) {
    throw domain_error("skew-normal certificate requires n >= 2");
  }
  const double l = std::abs(lambda);
  SkewNormalCert c;
  c.n = n;
  c.lambda = lambda;
  c.mean = l / std::sqrt(1.0 + l * l) * std::sqrt(2.0 / std::numbers::pi);
  c.cdf_at_n_mean = detail::skew_normal_std_cdf(n * c.mean, l);
  c.negative_mass = 0.5 - std::atan(l) / std::numbers::pi;
  c.bound = detail::skew_normal_bound(c);
  return c;
}

inline MixabilityVerdict skewnormal_noncm_certificate(int n, double lambda) {
  auto c = skew_normal_bound_terms(n, lambda);
  MixabilityVerdict out;
  out.verdict = detail::skew_normal_fires(c) ? Verdict::NotJM : Verdict::Unknown;
  out.certificate = c;
  return out;
}

/// Least |lambda| (to within tol) at which the skew-normal certificate fires
/// for n copies, located by doubling then bisection.
inline double skewnormal_threshold(int n, double tol = 1e-8) {
  auto fires = [n](double l) { return detail::skew_normal_fires(skew_normal_bound_terms(n, l)); };
  double lo = 0.0;
  double hi = 1.0;
  while (!fires(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      throw domain_error("skew-normal certificate never fires below 1e12");
    }
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (fires(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// SSMN(mu, sigma^2, lambda, H): NotJM when the skew-normal bound fires at
/// lambda * v for every atom v of H.
inline MixabilityVerdict ssmn_noncm_certificate(int n, double lambda, const DiscreteLaw& h) {
  validate(h);
  SsmnCert cert;
  cert.n = n;
  cert.lambda = lambda;
  cert.atoms = h.values;
  bool all = true;
  for (double v : h.values) {
    auto c = skew_normal_bound_terms(n, lambda * v);
    all = all && detail::skew_normal_fires(c);
    cert.per_atom.push_back(c);
  }
  MixabilityVerdict out;
  out.verdict = all ? Verdict::NotJM : Verdict::Unknown;
  out.certificate = std::move(cert);
  return out;
}

/// RA evidence on the midpoint grid. Never a verdict on its own.
inline MixabilityVerdict oracle_evidence(const std::vector<UnivariateFamily>& families, int m,
                                         const RaOptions& opt = {}) {
  const auto grid = discretize(families, m);
  const auto ra = ra_minimize(grid, opt);
  MixabilityVerdict out;
  out.verdict = Verdict::Unknown;
  out.certificate = OracleEvidenceCert{m,
                                       grid.n(),
                                       ra.row_sum_spread,
                                       ra.row_sum_stddev,
                                       ra.restarts,
                                       ra.variance_trajectory};
  out.note = "rearrangement evidence only";
  return out;
}

/// Re-evaluates the stored inequality of a certificate from its stored inputs.
inline Verdict replay(const Certificate& certificate) {
  return std::visit(
      [](const auto& c) -> Verdict {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScaleInequalityCert>) {
          if (detail::scale_sum(c.scales) >= detail::scale_twice_max(c.scales)) {
            return Verdict::JM;
          }
          return c.iff ? Verdict::NotJM : Verdict::Unknown;
        } else if constexpr (std::is_same_v<C, BoundedSymmetricCert>) {
          return detail::bounded_fires(c) ? Verdict::NotJM : Verdict::Unknown;
        } else if constexpr (std::is_same_v<C, UnboundedSymmetricCert>) {
          return detail::unbounded_fires(c) ? Verdict::NotJM : Verdict::Unknown;
        } else if constexpr (std::is_same_v<C, SkewNormalCert>) {
          return detail::skew_normal_fires(c) ? Verdict::NotJM : Verdict::Unknown;
        } else if constexpr (std::is_same_v<C, SsmnCert>) {
          const bool all = !c.per_atom.empty() &&
                           std::all_of(c.per_atom.begin(), c.per_atom.end(),
                                       [](const auto& s) { return detail::skew_normal_fires(s); });
          return all ? Verdict::NotJM : Verdict::Unknown;
        } else {
          return Verdict::Unknown;
        }
      },
      certificate);
}

} // namespace jmix
