#include "jmix/distributions.hpp"
#include "support.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace jmix;
using testing_support::gk;
using testing_support::ks_critical;
using testing_support::ks_distance;

namespace {

const double kPi = std::numbers::pi;

std::vector<UnivariateFamily> family_grid() {
  const auto normal = CharacteristicGenerator::normal();
  const auto t3 = CharacteristicGenerator::student_t(3.0);
  DiscreteLaw h{{0.5, 2.0}, {0.5, 0.5}};
  return {family::uniform(-1.0, 1.0),
          family::uniform(0.0, 3.0),
          family::location_scale(SymmetricShape::uniform, 0.5, 2.0),
          family::location_scale(SymmetricShape::triangular, 1.0, 0.7),
          family::location_scale(SymmetricShape::logistic, -1.0, 1.5),
          family::location_scale(SymmetricShape::laplace, 0.0, 0.7),
          family::location_scale(t3, -1.0, 2.0),
          family::elliptical(0.0, 1.0, normal),
          family::elliptical(1.0, 2.0, t3),
          family::elliptical(0.0, 1.0, CharacteristicGenerator::cauchy()),
          family::elliptical(0.0, 1.5, CharacteristicGenerator::pearson_vii(2.0, 1.0)),
          family::elliptical(0.0, 1.0, CharacteristicGenerator::discrete_mixture({{0.3, 1.0}, {0.7, 3.0}})),
          family::bimodal_power(1.0, 1),
          family::bimodal_power(2.0, 3),
          family::bimodal_moment(0),
          family::bimodal_moment(1),
          family::bimodal_moment(3),
          family::bimodal_moment_mixture({1, 2}, {0.3, 0.7}),
          family::generalized_logistic(1.0, 1.0),
          family::generalized_logistic(1.0, 2.0),
          family::generalized_logistic(2.0, 0.5),
          family::kotz(2.0, 1.0, 1.0),
          family::kotz(3.0, 0.5, 2.0, 1.0, 0.5),
          family::skew_normal(0.0, 1.0, 0.0),
          family::skew_normal(1.0, 2.0, 3.0),
          family::skew_normal(0.0, 1.0, -5.0),
          family::ssmn(0.0, 1.0, 2.0, h),
          family::ssmn(0.0, 1.0, 0.0, h),
          family::slash(0.0, 1.0, normal, 2.0),
          family::slash(1.0, 1.0, normal, 1.0),
          family::slash(0.0, 1.0, t3, 3.0)};
}

/// Integral of the density over its support, split at the center so each
/// piece has at most one awkward end.
double total_mass(const UnivariateFamily& F) {
  const auto& fl = F.flags();
  auto f = [&F](double x) { return density(F, x); };
  const double c = std::isfinite(fl.support_lo) && std::isfinite(fl.support_hi)
                       ? 0.5 * (fl.support_lo + fl.support_hi)
                       : fl.center;
  if (std::holds_alternative<BimodalMoment>(F.kind()) ||
      std::holds_alternative<BimodalMomentMixture>(F.kind())) {
    // x = sin t removes the 1/sqrt(1 - x^2) endpoint singularity.
    return gk([&](double t) { return density(F, std::sin(t)) * std::cos(t); }, -kPi / 2, kPi / 2);
  }
  return gk(f, fl.support_lo, c) + gk(f, c, fl.support_hi);
}

double plot_lo(const UnivariateFamily& F) {
  return std::isfinite(F.flags().support_lo) ? F.flags().support_lo
                                             : F.flags().center - 8.0 * F.scale();
}

double plot_hi(const UnivariateFamily& F) {
  return std::isfinite(F.flags().support_hi) ? F.flags().support_hi
                                             : F.flags().center + 8.0 * F.scale();
}

} // namespace

// Point values ------------------------------------------------------------

TEST(Density, BimodalPowerValues) {
  const auto F = family::bimodal_power(1.0, 1);
  EXPECT_DOUBLE_EQ(density(F, 1.0), 1.5);
  EXPECT_EQ(density(F, 0.0), 0.0);
  EXPECT_EQ(density(F, 1.5), 0.0);
  EXPECT_EQ(density(F, -1.01), 0.0);
}

TEST(Density, ArcsineNormalizer) {
  // 1 / int_{-1}^{1} (1 - x^2)^(-1/2) dx, with x = sin t the integrand is 1.
  const double c0 = 1.0 / gk([](double) { return 1.0; }, -kPi / 2, kPi / 2);
  EXPECT_NEAR(density(family::bimodal_moment(0), 0.0), c0, 1e-14);
  EXPECT_NEAR(density(family::bimodal_moment(0), 0.0), 0.3183, 1e-4);
}

TEST(Cdf, BimodalPowerClosedForm) {
  EXPECT_EQ(cdf(family::bimodal_power(1.0, 1), 0.5), 0.5625);
  for (int r = 1; r <= 4; ++r) {
    EXPECT_DOUBLE_EQ(cdf(family::bimodal_power(2.0, r), 1.0), 0.5 + 1.0 / std::pow(2.0, 2 * r + 2));
  }
}

TEST(Cdf, BimodalMomentAgainstSubstitutedQuadrature) {
  // F_m(x) = C_m int_{-pi/2}^{asin x} sin^{2m} t dt, C_m^{-1} the same integral to pi/2.
  for (int m : {0, 1, 2, 5}) {
    const auto F = family::bimodal_moment(m);
    auto g = [m](double t) { return std::pow(std::sin(t), 2 * m); };
    const double norm = gk(g, -kPi / 2, kPi / 2);
    for (double x : {-0.9, -0.3, 0.0, 0.5, 0.75, 0.99}) {
      EXPECT_NEAR(cdf(F, x), gk(g, -kPi / 2, std::asin(x)) / norm, 1e-10) << m << " " << x;
    }
  }
  // m = 1 in closed form: 2/3 - sqrt(3)/(4 pi) at x = 1/2.
  EXPECT_NEAR(cdf(family::bimodal_moment(1), 0.5), 2.0 / 3.0 - std::sqrt(3.0) / (4.0 * kPi), 1e-14);
  EXPECT_NEAR(density(family::bimodal_moment(1), 0.5), 2.0 / kPi * 0.25 / std::sqrt(0.75), 1e-14);
}

TEST(Cdf, SkewNormalAgainstOwensT) {
  for (double lambda : {0.0, 0.5, 1.0, 3.0, -2.0, 20.0}) {
    const auto F = family::skew_normal(0.5, 1.5, lambda);
    for (double x : {-4.0, -1.0, 0.0, 0.5, 1.3, 3.0, 6.0}) {
      const double z = (x - 0.5) / 1.5;
      const double oracle = 0.5 * std::erfc(-z / std::sqrt(2.0)) - 2.0 * boost::math::owens_t(z, lambda);
      EXPECT_NEAR(cdf(F, x), oracle, 1e-9) << lambda << " " << x;
    }
  }
}

TEST(Cdf, StudentThreeClosedForm) {
  const auto F = family::elliptical(0.0, 1.0, CharacteristicGenerator::student_t(3.0));
  for (double t : {-10.0, -2.0, 0.0, 0.7, 4.0}) {
    const double s = std::sqrt(3.0);
    const double oracle = 0.5 + (t / (s * (1.0 + t * t / 3.0)) + std::atan(t / s)) / kPi;
    EXPECT_NEAR(cdf(F, t), oracle, 1e-12);
  }
}

TEST(Cdf, StandardLogisticCase) {
  const auto F = family::generalized_logistic(1.0, 1.0);
  for (double x : {-6.0, -1.0, 0.0, 0.3, 2.0, 9.0}) {
    EXPECT_NEAR(cdf(F, x), 1.0 / (1.0 + std::exp(-x)), 1e-9);
    EXPECT_NEAR(density(F, x), std::exp(-std::abs(x)) / std::pow(1.0 + std::exp(-std::abs(x)), 2), 1e-9);
  }
}

TEST(Cdf, KotzIncompleteGammaClosedForm) {
  for (auto [N, m, beta] : {std::tuple{2.0, 1.0, 1.0}, {3.0, 0.5, 2.0}, {1.5, 2.0, 0.75}}) {
    const auto F = family::kotz(N, m, beta);
    const double shape = (2.0 * N - 1.0) / (2.0 * beta);
    const double half = (1.0 / (2.0 * beta)) * std::pow(m, -shape) * boost::math::tgamma(shape);
    for (double z : {0.2, 0.8, 1.5, 3.0}) {
      EXPECT_NEAR(density(F, z), std::pow(z * z, N - 1.0) * std::exp(-m * std::pow(z, 2 * beta)) / (2.0 * half), 1e-9);
      EXPECT_NEAR(cdf(F, z), 0.5 + 0.5 * boost::math::gamma_p(shape, m * std::pow(z, 2 * beta)), 1e-9);
      EXPECT_NEAR(cdf(F, -z), 0.5 - 0.5 * boost::math::gamma_p(shape, m * std::pow(z, 2 * beta)), 1e-9);
    }
  }
}

TEST(Density, NormalSlashClosedForm) {
  // q = 1 with the normal generator: (phi(0) - phi(x)) / x^2.
  const auto F = family::slash(0.0, 1.0, CharacteristicGenerator::normal(), 1.0);
  for (double x : {0.3, 1.0, 2.5, 7.0}) {
    const double oracle = (1.0 - std::exp(-0.5 * x * x)) / (std::sqrt(2.0 * kPi) * x * x);
    EXPECT_NEAR(density(F, x), oracle, 1e-10);
    EXPECT_NEAR(density(F, -x), oracle, 1e-10);
  }
}

TEST(Density, SsmnIsMixtureOfConditionalSkewNormals) {
  DiscreteLaw h{{0.5, 2.0}, {0.25, 0.75}};
  const auto F = family::ssmn(1.0, 2.0, 1.5, h);
  for (double x : {-3.0, 0.0, 1.0, 2.5}) {
    double oracle = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double s = 2.0 * h.values[k];
      const double z = (x - 1.0) / s;
      oracle += h.weights[k] * 2.0 / s * std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi) *
                0.5 * std::erfc(-1.5 * h.values[k] * z / std::sqrt(2.0));
    }
    EXPECT_NEAR(density(F, x), oracle, 1e-12);
  }
}

TEST(Cdf, SymmetricFamiliesHalfAtCenter) {
  for (const auto& F : family_grid()) {
    if (!F.flags().symmetric) continue;
    EXPECT_NEAR(cdf(F, F.flags().center), 0.5, 1e-9) << F.name();
  }
}

TEST(Quantile, Examples) {
  EXPECT_DOUBLE_EQ(quantile(family::uniform(-1.0, 1.0), 0.75), 0.5);
  EXPECT_NEAR(quantile(family::bimodal_power(1.0, 1), 0.5625), 0.5, 1e-14);
  const auto N = family::elliptical(0.0, 1.0, CharacteristicGenerator::normal());
  EXPECT_NEAR(quantile(N, 0.975), testing_support::normal_quantile_oracle(0.975), 1e-10);
  EXPECT_NEAR(quantile(N, 0.975), 1.959964, 1e-6);
}

TEST(Quantile, RejectsProbabilitiesOutsideOpenInterval) {
  for (const auto& F : {family::uniform(0.0, 1.0), family::skew_normal(0.0, 1.0, 2.0)}) {
    EXPECT_THROW(quantile(F, 0.0), domain_error);
    EXPECT_THROW(quantile(F, 1.0), domain_error);
    EXPECT_THROW(quantile(F, -0.1), domain_error);
    EXPECT_THROW(quantile(F, std::nan("")), domain_error);
  }
}

TEST(Family, RejectsInvalidParameters) {
  EXPECT_THROW(family::uniform(1.0, 1.0), domain_error);
  EXPECT_THROW(family::bimodal_power(0.0, 1), domain_error);
  EXPECT_THROW(family::bimodal_power(1.0, 0), domain_error);
  EXPECT_THROW(family::bimodal_moment(-1), domain_error);
  EXPECT_THROW(family::generalized_logistic(0.0, 1.0), domain_error);
  EXPECT_THROW(family::kotz(1.0, 1.0, 1.0), domain_error);
  EXPECT_THROW(family::skew_normal(0.0, 0.0, 1.0), domain_error);
  EXPECT_THROW(family::ssmn(0.0, 1.0, 1.0, DiscreteLaw{{-1.0}, {1.0}}), domain_error);
  EXPECT_THROW(family::slash(0.0, 1.0, CharacteristicGenerator::normal(), 0.0), domain_error);
  EXPECT_THROW(family::location_scale(SymmetricShape::laplace, 0.0, -1.0), domain_error);
}

// Sampling examples -------------------------------------------------------

TEST(Sample, SkewNormalMeanMatchesHenzeMoment) {
  const auto xs = sample(family::skew_normal(0.0, 1.0, 1.0), 1'000'000, 3);
  const auto ms = testing_support::mean_se(xs);
  EXPECT_LE(std::abs(ms.mean - 1.0 / std::sqrt(kPi)), 3.0 * ms.se);
}

TEST(Sample, SkewNormalNegativeMass) {
  // 1/2 - atan(lambda)/pi, cross-checked by integrating 2 phi(x) Phi(lambda x) over (-inf, 0).
  for (double lambda : {0.0, 1.0}) {
    const double identity = 0.5 - std::atan(lambda) / kPi;
    const double integral = gk(
        [lambda](double x) {
          return 2.0 * std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi) *
                 0.5 * std::erfc(-lambda * x / std::sqrt(2.0));
        },
        -kInf, 0.0);
    EXPECT_NEAR(identity, integral, 1e-10);
    const auto xs = sample(family::skew_normal(0.0, 1.0, lambda), 1'000'000, 9);
    double neg = 0.0;
    for (double x : xs) neg += x < 0.0;
    const double p = neg / xs.size();
    const double se = std::sqrt(identity * (1.0 - identity) / xs.size());
    EXPECT_LE(std::abs(p - identity), 3.0 * se) << lambda;
  }
  EXPECT_NEAR(0.5 - std::atan(1.0) / kPi, 0.25, 1e-15);
}

TEST(Sample, DeterministicPerSeed) {
  for (const auto& F : family_grid()) {
    const auto a = sample(F, 50, 17);
    EXPECT_EQ(a, sample(F, 50, 17)) << F.name();
    EXPECT_NE(a, sample(F, 50, 18)) << F.name();
  }
}

// Properties ---------------------------------------------------------------

TEST(Property, DensityNormalizes) {
  for (const auto& F : family_grid()) {
    EXPECT_NEAR(total_mass(F), 1.0, 1e-6) << F.name();
  }
}

TEST(Property, SymmetryFlagHonesty) {
  for (const auto& F : family_grid()) {
    if (!F.flags().symmetric) continue;
    const double c = F.flags().center;
    const double reach = std::min(plot_hi(F) - c, c - plot_lo(F));
    for (int i = 0; i <= 100; ++i) {
      const double x = reach * i / 100.0;
      EXPECT_NEAR(density(F, c + x), density(F, c - x), 1e-12) << F.name() << " x=" << x;
    }
  }
}

TEST(Property, UnimodalityFlagHonesty) {
  for (const auto& F : family_grid()) {
    const double lo = plot_lo(F);
    const double hi = plot_hi(F);
    std::vector<double> f;
    for (int i = 0; i <= 400; ++i) f.push_back(density(F, lo + (hi - lo) * i / 400.0));
    if (F.flags().unimodal) {
      std::size_t k = 1;
      while (k < f.size() && f[k] >= f[k - 1] - 1e-12) ++k;
      while (k < f.size() && f[k] <= f[k - 1] + 1e-12) ++k;
      EXPECT_EQ(k, f.size()) << F.name() << " is flagged unimodal";
    }
  }
  for (const auto& F : {family::bimodal_power(1.0, 1), family::bimodal_power(2.0, 3),
                        family::kotz(2.0, 1.0, 1.0), family::kotz(3.0, 0.5, 2.0, 1.0, 0.5),
                        family::bimodal_moment(1)}) {
    EXPECT_FALSE(F.flags().unimodal) << F.name();
    const double c = F.flags().center;
    EXPECT_LT(density(F, c), density(F, c + 0.5 * F.scale())) << F.name();
    EXPECT_LT(density(F, c), density(F, c - 0.5 * F.scale())) << F.name();
  }
}

TEST(Property, CdfNondecreasing) {
  for (const auto& F : family_grid()) {
    double prev = 0.0;
    const double lo = plot_lo(F) - F.scale();
    const double hi = plot_hi(F) + F.scale();
    for (int i = 0; i <= 200; ++i) {
      const double v = cdf(F, lo + (hi - lo) * i / 200.0);
      EXPECT_GE(v, prev - 1e-12) << F.name();
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(Property, QuantileInvertsCdf) {
  for (const auto& F : family_grid()) {
    const double lo = plot_lo(F);
    const double hi = plot_hi(F);
    for (int i = 1; i < 40; ++i) {
      const double x = lo + (hi - lo) * i / 40.0;
      const double p = cdf(F, x);
      if (density(F, x) < 1e-2 || p <= 1e-6 || p >= 1.0 - 1e-6) continue;
      EXPECT_NEAR(quantile(F, p), x, 1e-8 * std::max(1.0, std::abs(x))) << F.name() << " x=" << x;
    }
  }
}

TEST(Property, SamplerMatchesCdfKolmogorovSmirnov) {
  const std::size_t n = 100'000;
  for (const auto& F : family_grid()) {
    const double d = ks_distance(sample(F, n, 12345), [&F](double x) { return cdf(F, x); });
    EXPECT_LE(d, ks_critical(n)) << F.name();
  }
}
