#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "goodwin/dynamics.hpp"
#include "goodwin/hopf.hpp"
#include "goodwin/oscillation.hpp"
#include "support.hpp"

using namespace goodwin;
using goodwin::testing::rel_err;

namespace {

const FeedbackSpec kF1 = FeedbackSpec::hill(1.0, 1.0, 20.0);
const FeedbackSpec kF2 = FeedbackSpec::hill(2.0, 3.0, 6.0);

double t0_for(double M, double n = 20.0) { return std::pow(M / (n - M), 1.0 / n); }  // beta = 1

}  // namespace

TEST(Hopf, PinningPutsEquilibriumAtT0) {
  for (double b : {0.01, 1.0, 7.0}) {
    const double T0 = t0_for(19.0);
    for (double mu : {-0.3, 0.0, 0.4}) {
      const auto m = make_family_member(b, T0, kF1, kF2, mu * b * b * b);
      EXPECT_LE(rel_err(find_equilibrium(m.model).T0, T0), 1e-12);
      EXPECT_NEAR(theta0(m.model, T0), mu * b * b * b, 1e-12 * 20.0 * b * b * b) << b << " " << mu;
    }
  }
}

TEST(Hopf, AchievableRangeLimits) {
  const double b = 2.0;
  const double T0 = t0_for(19.0);
  const auto [lo, hi] = achievable_mu_range(b, T0, kF1, kF2);
  EXPECT_NEAR(hi, b * b * b * 11.0, 1e-9);
  // g1 -> 0: theta0 -> b^3 (-2 M2(T0) - 8), M2 the log-slope of f2
  EXPECT_NEAR(lo, b * b * b * (-2.0 * M_of_T(kF2, T0) - 8.0), 1e-9);
  EXPECT_LT(theta0_of_g1(b, T0, kF1, kF2, 1e-8), 0.0);
  EXPECT_LE(rel_err(theta0_of_g1(b, T0, kF1, kF2, 1e6), hi), 0.05);
  EXPECT_THROW(invert_theta0(b, T0, kF1, kF2, hi), RangeError);
  EXPECT_THROW(invert_theta0(b, T0, kF1, kF2, 11.5 * b * b * b), RangeError);
  // M(T0) <= 8 leaves no positive mu
  EXPECT_THROW(build_family(b, t0_for(7.0), kF1, kF2, {0.1}), RangeError);
}

TEST(Hopf, ClassicalFamilyIsDegenerate) {
  // with f2 = 0 theta0 no longer depends on g1
  const double b = 1.0;
  const double T0 = t0_for(19.0);
  const auto zero = FeedbackSpec::zero();
  for (double g1 : {1e-6, 1.0, 1e6}) EXPECT_NEAR(theta0_of_g1(b, T0, kF1, zero, g1), 11.0, 1e-12);
  EXPECT_THROW(invert_theta0(b, T0, kF1, zero, 1.0), RangeError);
  EXPECT_DOUBLE_EQ(alpha_prime_at_zero(1.0, 0.3, 0.0), 1.0 / 24.0);
}

TEST(Hopf, ThetaIncreasesWithGain) {
  const double T0 = t0_for(19.0);
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const double g1 = std::pow(10.0, -6.0 + 12.0 * k / 999.0);
    const double th = theta0_of_g1(0.7, T0, kF1, kF2, g1);
    ASSERT_GT(th, prev);
    prev = th;
  }
}

TEST(Hopf, InversionRoundTrip) {
  const double T0 = t0_for(19.0);
  const auto f2 = FeedbackSpec::hill(2.0, 3.0, 6.0);
  for (double b : {0.05, 1.0}) {
    const auto [lo, hi] = achievable_mu_range(b, T0, kF1, f2);
    for (int k = 1; k < 40; ++k) {
      const double mu = lo + (hi - lo) * k / 40.0;
      const double g1 = invert_theta0(b, T0, kF1, f2, mu);
      EXPECT_NEAR(theta0_of_g1(b, T0, kF1, f2, g1), mu, 1e-12 * b * b * b * 20.0);
    }
  }
}

TEST(Hopf, CrossModuleAgreement) {
  // theta0 from the stability module equals the family's closed form
  const double b = 0.3;
  const double T0 = t0_for(18.0);
  const auto f2 = FeedbackSpec::hill(2.0, 3.0, 6.0);
  for (double g1 : {0.1, 1.0, 10.0, 100.0}) {
    const double g2 = g2_from_equilibrium(b, b, b, g1, T0, kF1, f2);
    const ModelInstance m({b, b, b, g1, g2}, kF1, f2);
    EXPECT_LE(std::abs(theta0(m, T0) - theta0_of_g1(b, T0, kF1, f2, g1)), 1e-13 * 9 * b * b * b);
    EXPECT_LE(std::abs(theta0_pinned(b, b, b, g1, T0, kF1, f2) - theta0_of_g1(b, T0, kF1, f2, g1)),
              1e-13 * 9 * b * b * b);
  }
}

TEST(Hopf, VerdictFlipsAcrossZero) {
  for (double b : {0.1, 1.0}) {
    const double T0 = t0_for(19.0);
    const double eps = 1e-6;  // well outside the default critical band 1e-9 max(1, a1 a2)
    const auto minus = make_family_member(b, T0, kF1, kF2, -eps);
    const auto zero = make_family_member(b, T0, kF1, kF2, 0.0);
    const auto plus = make_family_member(b, T0, kF1, kF2, eps);
    EXPECT_EQ(classify_local(minus.model, minus.equilibrium(T0)).verdict, Verdict::stable);
    EXPECT_EQ(classify_local(zero.model, zero.equilibrium(T0)).verdict, Verdict::critical);
    EXPECT_EQ(classify_local(plus.model, plus.equilibrium(T0)).verdict, Verdict::unstable);
    const auto r0 = classify_local(zero.model, zero.equilibrium(T0));
    EXPECT_LT(std::abs(r0.pair.real()), 1e-9 * b * b * b);
    // at the crossing omega^2 = c1 = 3 b^2 - g2 f2'(T0)
    const double c1 = 3.0 * b * b - zero.g2 * kF2.derivative(T0);
    EXPECT_NEAR(r0.pair.imag(), std::sqrt(c1), 1e-9 * b);
  }
}

TEST(Hopf, CrossingSpeed) {
  for (double b : {0.2, 1.0, 3.0}) {
    const double T0 = t0_for(19.0);
    const auto fam = build_family(b, T0, kF1, kF2, {0.0});
    const double expected = 1.0 / (2.0 * (12.0 * b * b - fam.g2_at_zero * kF2.derivative(T0)));
    EXPECT_DOUBLE_EQ(fam.alpha_prime0, expected);
    EXPECT_GT(fam.alpha_prime0, 0.0);
    const double h = 1e-8 * b * b * b;
    const auto p = make_family_member(b, T0, kF1, kF2, h);
    const auto m = make_family_member(b, T0, kF1, kF2, -h);
    const double fd = (classify_local(p.model, p.equilibrium(T0)).pair.real() -
                       classify_local(m.model, m.equilibrium(T0)).pair.real()) /
                      (2.0 * h);
    EXPECT_LE(rel_err(fd, fam.alpha_prime0), 1e-3) << "b=" << b;
  }
}

TEST(Hopf, T0HelperHitsTargetSlope) {
  const auto f = FeedbackSpec::hill(20.0, 20.0, 20.0);
  const double T0 = hill_t0_for_fraction(f, 0.95);
  EXPECT_NEAR(M_of_T(f, T0), 19.0, 1e-12);
  EXPECT_THROW(hill_t0_for_fraction(FeedbackSpec::constant(1.0)), DomainError);
}

TEST(Hopf, BuildFamilyRecordsGrid) {
  const double T0 = t0_for(19.0);
  const auto fam = build_family(1.0, T0, kF1, kF2, {-0.5, 0.0, 0.5});
  ASSERT_EQ(fam.members.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_GT(fam.members[i].g1, fam.members[i - 1].g1);
  EXPECT_EQ(fam.members[1].g1, fam.g1_at_zero);
  EXPECT_EQ(fam.g1_of_mu[2].first, 0.5);
}

TEST(Hopf, PositiveMuMemberOscillates) {
  const double b = 1.0;
  const double T0 = t0_for(19.0);
  const auto mem = make_family_member(b, T0, kF1, kF2, 0.5);
  const auto eq = mem.equilibrium(T0);
  const auto tr = integrate(mem.model, {eq.R0 * 1.01, eq.L0 * 1.01, eq.T0 * 1.01}, 3000.0);
  const auto rep = analyze_trajectory(tr, eq);
  EXPECT_EQ(rep.omega_class, OmegaClass::periodic);
  EXPECT_TRUE(rep.y_oscillatory);

  const auto neg = make_family_member(b, T0, kF1, kF2, -0.5);
  const auto eqn = neg.equilibrium(T0);
  const auto trn = integrate(neg.model, {eqn.R0 * 1.01, eqn.L0 * 1.01, eqn.T0 * 1.01}, 3000.0);
  EXPECT_EQ(analyze_trajectory(trn, eqn).omega_class, OmegaClass::equilibrium);
}
