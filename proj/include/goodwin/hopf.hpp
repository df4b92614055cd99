#pragma once

// One-parameter family crossing a Hopf bifurcation. With b1 = b2 = b3 = b
// and g2 pinned so that the equilibrium sits at a chosen T0, the
// discriminant theta0 is a strictly increasing function of g1 as long as
// f2(T0) > 0 (with f2(T0) = 0 it is b^3 (M(T0) - 8) whatever g1). Inverting it
// gives g1(mu) with theta0 = mu, and the complex eigenvalue pair crosses the
// imaginary axis at mu = 0 with speed
//   alpha'(0) = 1 / (2 [a1^2 + a2 - g2 f2'(T0)]) > 0.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "goodwin/equilibrium.hpp"
#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"
#include "goodwin/stability.hpp"

namespace goodwin {

/// g2 that makes T0 the root of the equilibrium equation:
///   g2 = b1 b2 b3 T0 / (g1 f1(T0) + b1 f2(T0)).
inline double g2_from_equilibrium(double b1, double b2, double b3, double g1, double T0, const FeedbackSpec& f1,
                                  const FeedbackSpec& f2) {
  if (!(b1 > 0 && b2 > 0 && b3 > 0 && g1 > 0 && T0 > 0)) throw DomainError("g2_from_equilibrium needs positive inputs");
  return b1 * b2 * b3 * T0 / (g1 * f1.value_unchecked(T0) + b1 * f2.value_unchecked(T0));
}

/// theta0 of the model whose g2 is pinned by g2_from_equilibrium, written as
///   a3 [T0 (b2+b3) f2' / D + g1 (-T0 f1') / D - a1 a2 / a3 + 1],
///   D = g1 f1(T0) + b1 f2(T0).
inline double theta0_pinned(double b1, double b2, double b3, double g1, double T0, const FeedbackSpec& f1,
                            const FeedbackSpec& f2) {
  const auto [a1, a2, a3] = coefficient_sums(b1, b2, b3);
  const double D = g1 * f1.value_unchecked(T0) + b1 * f2.value_unchecked(T0);
  const double bracket = T0 * (b2 + b3) * f2.derivative_unchecked(T0) / D +
                         g1 * (-T0 * f1.derivative_unchecked(T0)) / D - a1 * a2 / a3 + 1.0;
  return a3 * bracket;
}

/// Equal-rate case b1 = b2 = b3 = b, where a1 a2 / a3 = 9.
inline double theta0_of_g1(double b, double T0, const FeedbackSpec& f1, const FeedbackSpec& f2, double g1) {
  if (!(b > 0 && T0 > 0 && g1 > 0)) throw DomainError("theta0_of_g1 needs positive b, T0, g1");
  const double D = g1 * f1.value_unchecked(T0) + b * f2.value_unchecked(T0);
  const double bracket =
      T0 * 2.0 * b * f2.derivative_unchecked(T0) / D + g1 * (-T0 * f1.derivative_unchecked(T0)) / D - 8.0;
  return b * b * b * bracket;
}

inline constexpr double kFamilyMinGain = 1e-12;

/// Open interval of achievable theta0 values: (theta0(g1_min), b^3 (M(T0) - 8)).
inline std::pair<double, double> achievable_mu_range(double b, double T0, const FeedbackSpec& f1,
                                                     const FeedbackSpec& f2) {
  return {theta0_of_g1(b, T0, f1, f2, kFamilyMinGain), b * b * b * (M_of_T(f1, T0) - 8.0)};
}

/// g1 with theta0_of_g1(g1) = mu, by bisection in log g1 over an expanded
/// bracket; converges to the resolution of double precision.
inline double invert_theta0(double b, double T0, const FeedbackSpec& f1, const FeedbackSpec& f2, double mu) {
  if (!(f2.value_unchecked(T0) > 0.0)) {
    throw RangeError("f2(T0) = 0: theta0 = b^3 (M(T0) - 8) for every g1, so the family cannot be parametrised by mu");
  }
  const auto [lo_mu, hi_mu] = achievable_mu_range(b, T0, f1, f2);
  if (!(mu > lo_mu && mu < hi_mu)) {
    throw RangeError("mu = " + std::to_string(mu) + " outside achievable range (" + std::to_string(lo_mu) + ", " +
                     std::to_string(hi_mu) + "); M(T0) must exceed 8 for positive mu");
  }
  auto f = [&](double g1) { return theta0_of_g1(b, T0, f1, f2, g1) - mu; };
  double lo = kFamilyMinGain;
  double hi = 1.0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300) throw RangeError("could not bracket g1 for mu = " + std::to_string(mu));
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = std::sqrt(lo) * std::sqrt(hi);
    const double m = (mid > lo && mid < hi) ? mid : lo + 0.5 * (hi - lo);
    if (!(m > lo && m < hi)) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fm < 0.0) {
      lo = m;
    } else {
      hi = m;
    }
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

/// alpha'(0) = 1 / (2 [a1^2 + a2 - g2 f2'(T0)]) with a1 = 3b, a2 = 3b^2.
inline double alpha_prime_at_zero(double b, double g2, double f2_deriv_at_T0) {
  const double a1 = 3.0 * b;
  const double a2 = 3.0 * b * b;
  return 1.0 / (2.0 * (a1 * a1 + a2 - g2 * f2_deriv_at_T0));
}

/// T0 at which the Hill log-slope M(T0) equals fraction * n.
inline double hill_t0_for_fraction(const FeedbackSpec& f1, double fraction = 0.95) {
  if (f1.kind() != FeedbackKind::hill) throw DomainError("hill_t0_for_fraction needs a Hill f1");
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("fraction must lie in (0, 1)");
  const auto& h = *f1.hill_parameters();
  const double u = fraction / (1.0 - fraction);
  return std::pow(u / h.beta, 1.0 / h.n);
}

struct FamilyMember {
  double mu{};
  double g1{};
  double g2{};
  ModelInstance model;

  /// Equilibrium known by construction (T0 exactly).
  EquilibriumPoint equilibrium(double T0) const { return assemble_equilibrium(model, T0); }
};

struct HopfFamily {
  double b{};
  double T0{};
  FeedbackSpec f1 = FeedbackSpec::zero();
  FeedbackSpec f2 = FeedbackSpec::zero();
  std::pair<double, double> mu_range{};
  std::vector<std::pair<double, double>> g1_of_mu;  // (mu, g1)
  double g1_at_zero{};
  double g2_at_zero{};
  double alpha_prime0{};
  std::vector<FamilyMember> members;
};

inline FamilyMember make_family_member(double b, double T0, const FeedbackSpec& f1, const FeedbackSpec& f2,
                                       double mu) {
  const double g1 = invert_theta0(b, T0, f1, f2, mu);
  const double g2 = g2_from_equilibrium(b, b, b, g1, T0, f1, f2);
  return {mu, g1, g2, ModelInstance(ModelParameters{b, b, b, g1, g2}, f1, f2)};
}

inline HopfFamily build_family(double b, double T0, const FeedbackSpec& f1, const FeedbackSpec& f2,
                               const std::vector<double>& mu_grid) {
  if (!(b > 0.0 && T0 > 0.0)) throw DomainError("build_family needs b > 0 and T0 > 0");
  if (!(M_of_T(f1, T0) > 8.0)) throw RangeError("M(T0) <= 8: no Hopf crossing is reachable at this T0");
  HopfFamily fam;
  fam.b = b;
  fam.T0 = T0;
  fam.f1 = f1;
  fam.f2 = f2;
  fam.mu_range = achievable_mu_range(b, T0, f1, f2);
  fam.g1_at_zero = invert_theta0(b, T0, f1, f2, 0.0);
  fam.g2_at_zero = g2_from_equilibrium(b, b, b, fam.g1_at_zero, T0, f1, f2);
  fam.alpha_prime0 = alpha_prime_at_zero(b, fam.g2_at_zero, f2.derivative_unchecked(T0));
  fam.members.reserve(mu_grid.size());
  for (double mu : mu_grid) {
    fam.members.push_back(make_family_member(b, T0, f1, f2, mu));
    fam.g1_of_mu.emplace_back(mu, fam.members.back().g1);
  }
  return fam;
}

}  // namespace goodwin
