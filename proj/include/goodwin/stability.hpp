#pragma once

// Local stability of the equilibrium: Routh-Hurwitz discriminant, eigenvalue
// classification, and the parameter-independent M(T) < 8 test on f1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "goodwin/cubic.hpp"
#include "goodwin/equilibrium.hpp"
#include "goodwin/model.hpp"

namespace goodwin {

enum class Verdict { stable, unstable, critical };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::critical: return "critical";
  }
  return "?";
}

/// Routh-Hurwitz discriminant
///   theta0 = a3 - a1 a2 + g2 [(b2 + b3) f2'(T0) - g1 f1'(T0)].
/// The equilibrium is stable for theta0 < 0 and unstable for theta0 > 0.
inline double theta0(const ModelInstance& model, double T0) {
  const auto& p = model.params();
  const auto [a1, a2, a3] = coefficient_sums(p);
  return a3 - a1 * a2 +
         p.g2 * ((p.b2 + p.b3) * model.f2().derivative_unchecked(T0) - p.g1 * model.f1().derivative_unchecked(T0));
}

inline double theta0(const ModelInstance& model, const EquilibriumPoint& eq) { return theta0(model, eq.T0); }

/// 1e-9 * max(1, a1 a2): theta0 scales like a cubic in the rates.
inline double default_critical_tolerance(const ModelParameters& p) {
  const auto s = coefficient_sums(p);
  return 1e-9 * std::max(1.0, s.a1 * s.a2);
}

struct StabilityReport {
  double theta0{};
  double a1{};
  double a2{};
  double a3{};
  CubicRoots eigenvalues{};
  Verdict verdict{Verdict::stable};
  double critical_tolerance{};
  // |Re| of the non-real pair is at most |theta0| / (2 c1), c1 = a2 - g2 f2'(T0).
  double pair_real_part_bound{};
  bool structure_ok{};  // one negative real root; other two conjugate or same-sign reals
  double real_root{};
  Complex pair{};  // root of the remaining pair with non-negative imaginary part

  double max_pair_real_part() const { return pair.real(); }
};

namespace detail {

// Picks the most negative real root as "the" real root and returns the index.
inline int distinguished_real_root(const CubicRoots& roots) {
  int best = -1;
  for (int i = 0; i < 3; ++i) {
    if (roots[i].imag() == 0.0 && (best < 0 || roots[i].real() < roots[best].real())) best = i;
  }
  return best;
}

}  // namespace detail

inline StabilityReport classify_local(const ModelInstance& model, const EquilibriumPoint& eq,
                                      std::optional<double> critical_tol = std::nullopt) {
  const auto& p = model.params();
  const auto sums = coefficient_sums(p);
  StabilityReport rep;
  rep.a1 = sums.a1;
  rep.a2 = sums.a2;
  rep.a3 = sums.a3;
  rep.theta0 = theta0(model, eq);
  rep.critical_tolerance = critical_tol.value_or(default_critical_tolerance(p));

  const Matrix3 J = jacobian(model, eq.state());
  rep.eigenvalues = eigenvalues(J);

  const int ri = detail::distinguished_real_root(rep.eigenvalues);
  if (ri < 0) throw EigenSolverError("characteristic polynomial has no real root");
  rep.real_root = rep.eigenvalues[ri].real();
  std::array<Complex, 2> rest{};
  for (int i = 0, k = 0; i < 3; ++i) {
    if (i != ri) rest[k++] = rep.eigenvalues[i];
  }
  rep.pair = rest[0].imag() >= rest[1].imag() ? rest[0] : rest[1];
  if (rest[0].imag() == 0.0) rep.pair = rest[0].real() >= rest[1].real() ? rest[0] : rest[1];
  const bool conj = rest[0].imag() != 0.0 && rest[0].imag() == -rest[1].imag();
  const bool same_sign = rest[0].imag() == 0.0 && rest[1].imag() == 0.0 &&
                         ((rest[0].real() > 0.0 && rest[1].real() > 0.0) || (rest[0].real() < 0.0 && rest[1].real() < 0.0));
  rep.structure_ok = rep.real_root < 0.0 && (conj || same_sign);

  const double c1 = sums.a2 - p.g2 * model.f2().derivative_unchecked(eq.T0);
  rep.pair_real_part_bound = std::abs(rep.theta0) / (2.0 * c1);

  if (std::abs(rep.theta0) <= rep.critical_tolerance) {
    rep.verdict = Verdict::critical;
  } else {
    rep.verdict = rep.theta0 < 0.0 ? Verdict::stable : Verdict::unstable;
  }
  return rep;
}

/// M(T) = -T f1'(T) / f1(T), the logarithmic slope of f1.
inline double M_of_T(const FeedbackSpec& f1, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("M(T) requires T > 0");
  if (f1.kind() == FeedbackKind::hill) return detail::hill_log_slope(*f1.hill_parameters(), T);
  if (f1.kind() == FeedbackKind::constant) return 0.0;
  return -T * f1.derivative_unchecked(T) / f1.value_unchecked(T);
}

enum class Theorem1Class { always_stable, boundary, instability_possible };

inline const char* to_string(Theorem1Class c) {
  switch (c) {
    case Theorem1Class::always_stable: return "always-stable";
    case Theorem1Class::boundary: return "boundary";
    case Theorem1Class::instability_possible: return "instability-possible";
  }
  return "?";
}

struct Theorem1Verdict {
  double supM{};
  double argmaxT{};  // +inf when the supremum is approached as T -> inf
  Theorem1Class cls{Theorem1Class::always_stable};
};

inline Theorem1Class classify_sup_M(double supM, double tol = 1e-9) {
  if (std::abs(supM - 8.0) <= tol * 8.0) return Theorem1Class::boundary;
  return supM < 8.0 ? Theorem1Class::always_stable : Theorem1Class::instability_possible;
}

namespace detail {

// Golden-section search for a maximum of g on [lo, hi].
template <class F>
std::pair<double, double> golden_maximize(F&& g, double lo, double hi, int iters = 200) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + invphi * (hi - lo);
      g2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - invphi * (hi - lo);
      g1 = g(x1);
    }
  }
  return g1 >= g2 ? std::pair{x1, g1} : std::pair{x2, g2};
}

// Log-spaced scan of g on [t_max * 1e-9, t_max] plus golden refinement of the
// best cell. Returns (argmax, max).
template <class F>
std::pair<double, double> scan_maximum(F&& g, double t_max, std::size_t grid_size) {
  const double t_min = t_max * 1e-9;
  const double log_lo = std::log(t_min);
  const double step = (std::log(t_max) - log_lo) / static_cast<double>(grid_size - 1);
  std::vector<double> ts(grid_size);
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_size; ++i) {
    ts[i] = i + 1 == grid_size ? t_max : std::exp(log_lo + step * static_cast<double>(i));
    const double v = g(ts[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = ts[best == 0 ? 0 : best - 1];
  const double hi = ts[std::min(best + 1, grid_size - 1)];
  auto [x, v] = golden_maximize(g, lo, hi);
  if (v >= best_val) return {x, v};
  return {ts[best], best_val};
}

}  // namespace detail

/// Supremum of M over (0, t_max]. Exact for Hill (n, approached as T -> inf)
/// and constant (0) feedbacks; log-grid scan with golden refinement otherwise.
inline Theorem1Verdict sup_M(const FeedbackSpec& f1, double t_max = 1e3, std::size_t grid_size = 10000) {
  if (!(t_max > 0.0) || grid_size < 2) throw DomainError("sup_M needs t_max > 0 and grid_size >= 2");
  Theorem1Verdict v;
  if (f1.kind() == FeedbackKind::hill) {
    v.supM = f1.hill_parameters()->n;
    v.argmaxT = std::numeric_limits<double>::infinity();
  } else if (f1.kind() == FeedbackKind::constant) {
    v.supM = 0.0;
    v.argmaxT = t_max;
  } else {
    auto [x, m] = detail::scan_maximum([&](double T) { return M_of_T(f1, T); }, t_max, grid_size);
    v.supM = m;
    v.argmaxT = x;
  }
  v.cls = classify_sup_M(v.supM);
  return v;
}

}  // namespace goodwin
