#pragma once

#include <cmath>

#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"

namespace goodwin {

/// The unique positive equilibrium (R0, L0, T0).
struct EquilibriumPoint {
  double R0{};
  double L0{};
  double T0{};
  double residual{};  // |equilibrium_residual(model, T0)|

  State state() const { return {R0, L0, T0}; }
};

/// Scalar equation whose unique positive root is T0:
///   b1 b2 b3 / (g1 g2) T - [f1(T) + (b1/g1) f2(T)].
/// Strictly increasing in T, negative at T = 0.
inline double equilibrium_residual(const ModelInstance& model, double T) {
  const auto& p = model.params();
  return p.b1 * p.b2 * p.b3 / (p.g1 * p.g2) * T -
         (model.f1().value_unchecked(T) + p.b1 / p.g1 * model.f2().value_unchecked(T));
}

inline constexpr double kDefaultRootTolerance = 1e-12;

/// Bracket [0, 2^k] by doubling, then shrink with an Illinois false-position
/// step guarded by bisection. Iterates until the bracket is narrower than
/// 1e-4 * tol or has no representable interior point, so T0 is located to
/// well within `tol`.
inline double equilibrium_root(const ModelInstance& model, double tol = kDefaultRootTolerance) {
  if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");
  constexpr int kMaxDoublings = 200;

  double lo = 0.0;
  double flo = equilibrium_residual(model, lo);
  if (!(flo < 0.0)) throw BracketError("equilibrium residual is not negative at T = 0");
  double hi = 1.0;
  double fhi = equilibrium_residual(model, hi);
  for (int k = 0; !(fhi > 0.0); ++k) {
    if (k >= kMaxDoublings || !std::isfinite(fhi)) {
      throw BracketError("could not bracket the equilibrium root within [0, 2^200]");
    }
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = equilibrium_residual(model, hi);
  }
  if (fhi == 0.0) return hi;

  int stale_side = 0;  // +1 if hi was kept last iteration, -1 if lo
  for (int iter = 0; iter < 2000; ++iter) {
    const double width = hi - lo;
    if (width <= 1e-4 * tol) break;
    double x = lo - flo * width / (fhi - flo);
    const double mid = lo + 0.5 * width;
    // fall back to bisection when false position stalls near an endpoint
    if (!(x > lo && x < hi) || iter % 3 == 2) x = mid;
    if (x <= lo || x >= hi) break;  // no representable interior point left
    const double fx = equilibrium_residual(model, x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (stale_side == 1) fhi *= 0.5;
      stale_side = 1;
    } else {
      hi = x;
      fhi = fx;
      if (stale_side == -1) flo *= 0.5;
      stale_side = -1;
    }
  }
  const double rlo = std::abs(equilibrium_residual(model, lo));
  const double rhi = std::abs(equilibrium_residual(model, hi));
  return rlo <= rhi ? lo : hi;
}

inline EquilibriumPoint assemble_equilibrium(const ModelInstance& model, double T0) {
  const auto& p = model.params();
  return {model.f1().value_unchecked(T0) / p.b1, p.b3 / p.g2 * T0, T0,
          std::abs(equilibrium_residual(model, T0))};
}

inline EquilibriumPoint find_equilibrium(const ModelInstance& model, double tol = kDefaultRootTolerance) {
  return assemble_equilibrium(model, equilibrium_root(model, tol));
}

}  // namespace goodwin
