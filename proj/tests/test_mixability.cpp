#include "jmix/couplings.hpp"
#include "jmix/io.hpp"
#include "jmix/mixability.hpp"
#include "jmix/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace jmix;

namespace {

std::vector<UnivariateFamily> copies(const UnivariateFamily& F, int k) {
  return std::vector<UnivariateFamily>(static_cast<std::size_t>(k), F);
}

Verdict replay_through_json(const MixabilityVerdict& v) {
  const auto text = verdict_to_json(v).dump();
  return replay(verdict_from_json(json::parse(text)).certificate);
}

} // namespace

// Scale inequality ------------------------------------------------------------

TEST(ScaleInequality, Examples) {
  EXPECT_TRUE(check_scale_inequality(std::vector<double>{1, 1, 1}));
  EXPECT_FALSE(check_scale_inequality(std::vector<double>{3, 1, 1}));
  EXPECT_TRUE(check_scale_inequality(std::vector<double>{2, 1, 1}));
  EXPECT_TRUE(check_scale_inequality(std::vector<double>{1, 1}));
  EXPECT_FALSE(check_scale_inequality(std::vector<double>{1}));
}

TEST(ScaleInequality, BoundaryIsExact) {
  EXPECT_TRUE(check_scale_inequality(std::vector<double>{2.0, 1.0, 1.0}));
  EXPECT_FALSE(check_scale_inequality(std::vector<double>{2.0 + 1e-9, 1.0, 1.0}));
  EXPECT_FALSE(check_scale_inequality(std::vector<double>{std::nextafter(2.0, 3.0), 1.0, 1.0}));
  EXPECT_TRUE(check_scale_inequality(std::vector<double>{2.0, 1.0, std::nextafter(1.0, 2.0)}));
}

TEST(ScaleInequality, RejectsEmptyAndNonpositive) {
  EXPECT_THROW(check_scale_inequality(std::vector<double>{}), domain_error);
  EXPECT_THROW(check_scale_inequality(std::vector<double>{1.0, 0.0}), domain_error);
  EXPECT_THROW(check_scale_inequality(std::vector<double>{1.0, -2.0}), domain_error);
  EXPECT_THROW(check_scale_inequality(std::vector<double>{1.0, std::nan("")}), domain_error);
}

// Location-scale and elliptical verdicts ---------------------------------------

TEST(UnimodalLocationScale, Examples) {
  const auto uni = family::location_scale(SymmetricShape::uniform, 0.0, 1.0);
  const auto normal = family::elliptical(0.0, 1.0, CharacteristicGenerator::normal());

  const auto a = jm_verdict_unimodal_location_scale(uni, std::vector<double>{1, 1}, std::vector<double>{0, 0});
  EXPECT_EQ(a.verdict, Verdict::JM);
  EXPECT_EQ(*a.joint_center, 0.0);

  const auto b = jm_verdict_unimodal_location_scale(normal, std::vector<double>{3, 1, 1},
                                                    std::vector<double>{0, 0, 0});
  EXPECT_EQ(b.verdict, Verdict::NotJM);
  EXPECT_FALSE(b.joint_center.has_value());

  const auto c = jm_verdict_unimodal_location_scale(normal, std::vector<double>{2, 1.5, 1},
                                                    std::vector<double>{1, 2, 3});
  EXPECT_EQ(c.verdict, Verdict::JM);
  EXPECT_EQ(*c.joint_center, 6.0);
  const auto batch = sample_jm_elliptical(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1.5, 1},
                                          CharacteristicGenerator::normal(), 10'000, 1);
  EXPECT_TRUE(verify_constant_sum(batch, *c.joint_center, 1e-8).pass);
}

TEST(UnimodalLocationScale, RejectsNonUnimodalBase) {
  const auto v = jm_verdict_unimodal_location_scale(family::bimodal_power(1.0, 1),
                                                    std::vector<double>{1, 1, 1},
                                                    std::vector<double>{0, 0, 0});
  EXPECT_EQ(v.verdict, Verdict::Unknown);
  EXPECT_NE(v.note.find("hypothesis violated"), std::string::npos);
  const auto w = jm_verdict_unimodal_location_scale(family::skew_normal(0.0, 1.0, 2.0),
                                                    std::vector<double>{1, 1}, std::vector<double>{0, 0});
  EXPECT_EQ(w.verdict, Verdict::Unknown);
}

TEST(Elliptical, Examples) {
  const auto a = jm_verdict_elliptical(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3},
                                       CharacteristicGenerator::normal());
  EXPECT_EQ(a.verdict, Verdict::JM);
  EXPECT_EQ(*a.joint_center, 6.0);

  const auto b = jm_verdict_elliptical(std::vector<double>{5, 1, 1}, std::vector<double>{0, 0, 0},
                                       CharacteristicGenerator::student_t(3.0));
  EXPECT_EQ(b.verdict, Verdict::NotJM);

  const auto c = jm_verdict_elliptical(std::vector<double>{1, 1}, std::vector<double>{0, 0},
                                       CharacteristicGenerator::cauchy());
  EXPECT_EQ(c.verdict, Verdict::JM);
  EXPECT_EQ(*c.joint_center, 0.0);
}

TEST(Elliptical, EveryGeneratorIsUnimodalSoFailureIsNotJm) {
  for (const auto& g : {CharacteristicGenerator::normal(), CharacteristicGenerator::cauchy(),
                        CharacteristicGenerator::pearson_vii(2.0, 1.0),
                        CharacteristicGenerator::discrete_mixture({{0.5, 1.0}, {0.5, 4.0}})}) {
    const auto v = jm_verdict_elliptical(std::vector<double>{3, 1, 1}, std::vector<double>{0, 0, 0}, g);
    EXPECT_EQ(v.verdict, Verdict::NotJM) << g.name();
    EXPECT_TRUE(std::get<ScaleInequalityCert>(v.certificate).iff);
  }
}

TEST(Verdict, JmImpliesSamplerReachesCenter) {
  const std::vector<std::vector<double>> sigmas{{1, 1, 1}, {2, 1.5, 1}, {1, 1}, {3, 1, 1, 1}, {2, 2, 2, 2, 2}};
  for (const auto& s : sigmas) {
    const std::vector<double> mu(s.size(), 0.5);
    for (const auto& g : {CharacteristicGenerator::normal(), CharacteristicGenerator::cauchy()}) {
      const auto v = jm_verdict_elliptical(s, mu, g);
      ASSERT_EQ(v.verdict, Verdict::JM);
      const auto batch = sample_jm_elliptical(mu, s, g, 10'000, 4);
      const auto rep = verify_constant_sum(batch, *v.joint_center, 1e-8);
      EXPECT_TRUE(rep.pass) << g.name() << " dev=" << rep.max_abs_deviation;
    }
  }
}

// Bounded symmetric certificate ---------------------------------------------------

TEST(BoundedSymmetric, ExampleTwoThree) {
  const auto v = not_jm_bounded_symmetric(copies(family::bimodal_power(1.0, 1), 3), 1.0);
  EXPECT_EQ(v.verdict, Verdict::NotJM);
  const auto& c = std::get<BoundedSymmetricCert>(v.certificate);
  EXPECT_EQ(c.n, 1);
  EXPECT_EQ(c.point, 0.5);
  for (double x : c.cdf_values) EXPECT_EQ(x, 0.5625);
  EXPECT_DOUBLE_EQ(c.threshold, 2.0 / 3.0);
  EXPECT_FALSE(c.necessary_condition_holds);
}

TEST(BoundedSymmetric, UniformDoesNotFire) {
  const auto v = not_jm_bounded_symmetric(copies(family::uniform(-1.0, 1.0), 3), 1.0);
  EXPECT_EQ(v.verdict, Verdict::Unknown);
  const auto& c = std::get<BoundedSymmetricCert>(v.certificate);
  EXPECT_EQ(c.cdf_values.front(), 0.75);
  EXPECT_TRUE(c.necessary_condition_holds);
}

TEST(BoundedSymmetric, FiveCopiesOfPowerTwo) {
  const auto F = family::bimodal_power(1.0, 2);
  const auto v = not_jm_bounded_symmetric(copies(F, 5), 1.0);
  EXPECT_EQ(v.verdict, Verdict::NotJM);
  const auto& c = std::get<BoundedSymmetricCert>(v.certificate);
  EXPECT_EQ(c.n, 2);
  const double closed = 0.5 + std::pow(2.0 / 3.0, 5) / 2.0;
  EXPECT_NEAR(c.cdf_values.front(), closed, 1e-15);
  EXPECT_NEAR(closed, 0.5658, 1e-4);
  EXPECT_DOUBLE_EQ(c.threshold, 0.6);
}

TEST(BoundedSymmetric, ArcsineEqualityDoesNotFire) {
  // F_0(1/2) = 2/3 equals the n = 1 threshold; the arcsine law is 3-CM.
  const auto v = not_jm_bounded_symmetric(copies(family::bimodal_moment(0), 3), 1.0);
  EXPECT_EQ(v.verdict, Verdict::Unknown);
}

TEST(BoundedSymmetric, HypothesisViolations) {
  EXPECT_THROW(not_jm_bounded_symmetric(copies(family::bimodal_power(2.0, 1), 3), 1.0), hypothesis_violation);
  EXPECT_THROW(not_jm_bounded_symmetric(copies(family::skew_normal(0.0, 1.0, 1.0), 3), 1.0), hypothesis_violation);
  EXPECT_THROW(not_jm_bounded_symmetric(copies(family::uniform(0.0, 1.0), 3), 1.0), hypothesis_violation);
  EXPECT_THROW(not_jm_bounded_symmetric(copies(family::uniform(-1.0, 1.0), 4), 1.0), domain_error);
  EXPECT_THROW(not_jm_bounded_symmetric(copies(family::uniform(-1.0, 1.0), 1), 1.0), domain_error);
}

// Unbounded symmetric certificate -------------------------------------------------

TEST(UnboundedSymmetric, NormalsNeverFire) {
  const auto N = family::elliptical(0.0, 1.0, CharacteristicGenerator::normal());
  std::vector<double> grid;
  for (double a = 0.5; a <= 5.0 + 1e-12; a += 0.5) grid.push_back(a);
  const auto v = not_jm_unbounded_symmetric(copies(N, 3), grid);
  EXPECT_EQ(v.verdict, Verdict::Unknown);
  const auto& c = std::get<UnboundedSymmetricCert>(v.certificate);
  EXPECT_FALSE(c.witness_a.has_value());
  for (double a : grid) {
    EXPECT_LT(cdf(N, a) - cdf(N, a / 2.0), 1.0 / 3.0);
  }
  EXPECT_EQ(not_jm_unbounded_symmetric(copies(N, 3), default_a_grid(copies(N, 3))).verdict, Verdict::Unknown);
}

TEST(UnboundedSymmetric, ConcentratedDensityFiresAtOne) {
  // Three families means n = 1, so the window is [a/2, a]; the mass of
  // BimodalPower(1, 20) on [1/2, 1] is (1 - 0.5^41)/2.
  const auto F = family::bimodal_power(1.0, 20);
  const auto v = not_jm_unbounded_symmetric(copies(F, 3), {0.5, 1.0, 1.5});
  EXPECT_EQ(v.verdict, Verdict::NotJM);
  const auto& c = std::get<UnboundedSymmetricCert>(v.certificate);
  EXPECT_EQ(*c.witness_a, 1.0);
  for (double m : c.masses) EXPECT_NEAR(m, (1.0 - std::pow(0.5, 41)) / 2.0, 1e-15);
}

TEST(UnboundedSymmetric, KotzPeakFires) {
  const auto F = family::kotz(10.0, 1.0, 1.0);
  const auto v = not_jm_unbounded_symmetric(copies(F, 3), {4.0});
  EXPECT_EQ(v.verdict, Verdict::NotJM);
}

TEST(UnboundedSymmetric, EmptyGridIsUnknown) {
  const auto N = family::elliptical(0.0, 1.0, CharacteristicGenerator::normal());
  const auto v = not_jm_unbounded_symmetric(copies(N, 3), {});
  EXPECT_EQ(v.verdict, Verdict::Unknown);
  EXPECT_EQ(replay_through_json(v), Verdict::Unknown);
}

TEST(UnboundedSymmetric, DefaultGridIsLogSpaced) {
  const auto fams = copies(family::elliptical(0.0, 2.0, CharacteristicGenerator::normal()), 3);
  const auto grid = default_a_grid(fams);
  ASSERT_EQ(grid.size(), 64u);
  EXPECT_NEAR(grid.front(), 0.2, 1e-12);
  EXPECT_NEAR(grid.back(), 20.0, 1e-12);
  for (std::size_t i = 2; i < grid.size(); ++i) {
    EXPECT_NEAR(grid[i] / grid[i - 1], grid[1] / grid[0], 1e-12);
  }
}

// Skew-normal and SSMN ----------------------------------------------------------

TEST(SkewNormalCertificate, Examples) {
  for (int n = 2; n <= 6; ++n) {
    EXPECT_EQ(skewnormal_noncm_certificate(n, 0.0).verdict, Verdict::Unknown) << n;
  }
  const auto v = skewnormal_noncm_certificate(2, 50.0);
  EXPECT_EQ(v.verdict, Verdict::NotJM);
  const auto& c = std::get<SkewNormalCert>(v.certificate);
  EXPECT_NEAR(c.mean, 50.0 / std::sqrt(1.0 + 2500.0) * std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_NEAR(c.negative_mass, 0.5 - std::atan(50.0) / std::numbers::pi, 1e-15);
  EXPECT_LT(c.bound, 1.0);
}

TEST(SkewNormalCertificate, SignOfLambdaIsIrrelevant) {
  for (double l : {0.5, 3.0, 50.0}) {
    EXPECT_EQ(skewnormal_noncm_certificate(3, l).verdict, skewnormal_noncm_certificate(3, -l).verdict);
  }
}

TEST(SkewNormalCertificate, ThresholdMonotoneInN) {
  double prev = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const double t = skewnormal_threshold(n);
    EXPECT_GT(t, prev) << n;
    EXPECT_EQ(skewnormal_noncm_certificate(n, t).verdict, Verdict::NotJM);
    EXPECT_EQ(skewnormal_noncm_certificate(n, t * (1.0 - 1e-6)).verdict, Verdict::Unknown);
    prev = t;
  }
}

TEST(SsmnCertificate, PointMassReducesToSkewNormal) {
  for (double l : {0.0, 2.0, 50.0}) {
    const auto a = ssmn_noncm_certificate(2, l, DiscreteLaw::point_mass(1.0));
    const auto b = skewnormal_noncm_certificate(2, l);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(std::get<SsmnCert>(a.certificate).per_atom.front().bound,
              std::get<SkewNormalCert>(b.certificate).bound);
  }
}

TEST(SsmnCertificate, TwoAtoms) {
  DiscreteLaw h{{0.5, 2.0}, {0.5, 0.5}};
  const auto v = ssmn_noncm_certificate(2, 100.0, h);
  const bool both = skewnormal_noncm_certificate(2, 50.0).verdict == Verdict::NotJM &&
                    skewnormal_noncm_certificate(2, 200.0).verdict == Verdict::NotJM;
  EXPECT_EQ(v.verdict == Verdict::NotJM, both);
  EXPECT_EQ(ssmn_noncm_certificate(2, 0.0, h).verdict, Verdict::Unknown);
  EXPECT_THROW(ssmn_noncm_certificate(2, 1.0, DiscreteLaw{{0.0}, {1.0}}), domain_error);
}

// Replay ------------------------------------------------------------------------

TEST(Replay, EveryCertificateKindRoundTripsBitForBit) {
  std::vector<MixabilityVerdict> verdicts{
      jm_verdict_elliptical(std::vector<double>{2, 1.5, 1}, std::vector<double>{1, 2, 3},
                            CharacteristicGenerator::student_t(3.0)),
      jm_verdict_elliptical(std::vector<double>{3, 1, 1}, std::vector<double>{0, 0, 0},
                            CharacteristicGenerator::normal()),
      not_jm_bounded_symmetric(copies(family::bimodal_power(1.0, 1), 3), 1.0),
      not_jm_bounded_symmetric(copies(family::uniform(-1.0, 1.0), 3), 1.0),
      not_jm_bounded_symmetric(copies(family::bimodal_moment(2), 7), 1.0),
      not_jm_unbounded_symmetric(copies(family::bimodal_power(1.0, 20), 3), {0.5, 1.0}),
      not_jm_unbounded_symmetric(copies(family::kotz(2.0, 1.0, 1.0), 3),
                                 default_a_grid(copies(family::kotz(2.0, 1.0, 1.0), 3))),
      skewnormal_noncm_certificate(2, 50.0),
      skewnormal_noncm_certificate(4, 0.3),
      ssmn_noncm_certificate(3, 80.0, DiscreteLaw{{1.0, 3.0}, {0.5, 0.5}}),
      oracle_evidence(copies(family::uniform(0.0, 1.0), 3), 16)};
  for (const auto& v : verdicts) {
    EXPECT_EQ(replay(v.certificate), v.verdict) << verdict_to_json(v).dump();
    EXPECT_EQ(replay_through_json(v), v.verdict) << verdict_to_json(v).dump();
    const auto back = verdict_from_json(json::parse(verdict_to_json(v).dump()));
    EXPECT_EQ(verdict_to_json(back).dump(), verdict_to_json(v).dump());
  }
}

TEST(Replay, TamperedCertificateChangesVerdict) {
  auto j = verdict_to_json(not_jm_bounded_symmetric(copies(family::bimodal_power(1.0, 1), 3), 1.0));
  j["certificate"]["cdf_values"][1] = 0.7;
  EXPECT_EQ(replay(verdict_from_json(j).certificate), Verdict::Unknown);
  auto s = verdict_to_json(jm_verdict_elliptical(std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0},
                                                 CharacteristicGenerator::normal()));
  s["certificate"]["scales"] = {3.0, 1.0, 1.0};
  EXPECT_EQ(replay(verdict_from_json(s).certificate), Verdict::NotJM);
}

// Soundness against the oracle ----------------------------------------------------

TEST(Soundness, FiredBoundedCertificatesKeepRaSpreadAwayFromZero) {
  const std::vector<UnivariateFamily> fired{family::bimodal_power(1.0, 1), family::bimodal_power(1.0, 3),
                                            family::bimodal_moment(1)};
  for (const auto& F : fired) {
    const auto fams = copies(F, 3);
    ASSERT_EQ(not_jm_bounded_symmetric(fams, 1.0).verdict, Verdict::NotJM) << F.name();
    for (int m : {64, 128, 256}) {
      const auto ra = ra_minimize(discretize(fams, m));
      EXPECT_GT(ra.row_sum_spread, 1e-3 * F.scale()) << F.name() << " m=" << m;
    }
  }
}
