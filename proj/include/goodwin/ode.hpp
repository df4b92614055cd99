#pragma once

// Dormand-Prince 5(4) with PI step-size control and the classical
// 4th-order continuous extension (Hairer, Norsett & Wanner, DOPRI5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "goodwin/errors.hpp"

namespace goodwin::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Options {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0: automatic
  // Equidistant output grid over [t0, t_end] including both ends (>= 2), in
  // addition to the accepted step points when include_steps is set.
  std::size_t output_points = 20001;
  bool include_steps = true;
  std::size_t max_steps = 100'000'000;
};

template <std::size_t N>
struct Solution {
  std::vector<double> t;
  std::vector<Vec<N>> x;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct AlwaysAdmissible {
  template <class V>
  bool operator()(const V&) const {
    return true;
  }
};

namespace tableau {
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace tableau

/// Interpolant over one accepted step [t, t + h].
template <std::size_t N>
struct DenseStep {
  double t = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> r{};

  Vec<N> operator()(double time) const {
    const double s = (time - t) / h;
    const double s1 = 1.0 - s;
    Vec<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
    }
    return out;
  }
};

namespace detail {

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

template <std::size_t N>
double scaled_rms(const Vec<N>& v, const Vec<N>& ref, const Options& o) {
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = o.atol + o.rtol * std::abs(ref[i]);
    sum += (v[i] / sk) * (v[i] / sk);
  }
  return std::sqrt(sum / static_cast<double>(N));
}

template <std::size_t N, class Rhs>
double initial_step(Rhs& f, double t0, const Vec<N>& x0, const Vec<N>& f0, double dir_span, const Options& o) {
  const double d0 = scaled_rms(x0, x0, o);
  const double d1 = scaled_rms(f0, x0, o);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, o.max_step, dir_span});
  Vec<N> x1{};
  for (std::size_t i = 0; i < N; ++i) x1[i] = x0[i] + h0 * f0[i];
  const Vec<N> f1 = f(t0 + h0, x1);
  Vec<N> df{};
  for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - f0[i];
  const double d2 = scaled_rms(df, x0, o) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h0, h1, o.max_step, dir_span});
}

}  // namespace detail

/// Integrates x' = f(t, x) from (t0, x0) to t_end. A step whose end state
/// fails `admissible` is rejected and retried with half the step.
template <std::size_t N, class Rhs, class Admissible = AlwaysAdmissible>
Solution<N> dopri5(Rhs&& f, double t0, const Vec<N>& x0, double t_end, const Options& opt,
                   Admissible&& admissible = {}) {
  using namespace tableau;
  if (!(t_end > t0)) throw DomainError("integration interval must have t_end > t0");
  if (!(opt.rtol > 0.0) || !(opt.atol >= 0.0)) throw DomainError("tolerances must be positive");
  if (!detail::all_finite(x0)) throw DomainError("initial state is not finite");

  Solution<N> sol;
  const std::size_t n_grid = std::max<std::size_t>(opt.output_points, 2);
  const double grid_dt = (t_end - t0) / static_cast<double>(n_grid - 1);
  std::size_t next_grid = 1;
  auto grid_time = [&](std::size_t k) { return k + 1 == n_grid ? t_end : t0 + grid_dt * static_cast<double>(k); };

  sol.t.push_back(t0);
  sol.x.push_back(x0);

  constexpr double safe = 0.9;
  constexpr double facl = 0.2;   // smallest ratio h_new / h
  constexpr double facr = 10.0;  // largest ratio
  constexpr double beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;

  double t = t0;
  Vec<N> x = x0;
  Vec<N> k1 = f(t, x);
  if (!detail::all_finite(k1)) throw DomainError("vector field is not finite at the initial state");
  double h = opt.initial_step > 0.0 ? std::min(opt.initial_step, t_end - t0)
                                    : detail::initial_step<N>(f, t, x, k1, t_end - t0, opt);
  bool last_rejected = false;
  Vec<N> k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, y{}, xn{}, err{};

  while (t < t_end) {
    if (sol.accepted + sol.rejected >= opt.max_steps) throw StepSizeUnderflow("maximum number of steps exceeded");
    h = std::min(h, opt.max_step);
    bool final_step = false;
    if (t + h >= t_end || t + 1.01 * h >= t_end) {
      h = t_end - t;
      final_step = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));
    }

    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * a21 * k1[i];
    k2 = f(t + c2 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(t + c3 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(t + c4 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(t + c5 * h, y);
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const double tn = final_step ? t_end : t + h;
    k6 = f(tn, y);
    for (std::size_t i = 0; i < N; ++i) {
      xn[i] = x[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    k7 = f(tn, xn);
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    if (!detail::all_finite(xn) || !detail::all_finite(k7) || !admissible(xn)) {
      ++sol.rejected;
      h *= 0.5;
      last_rejected = true;
      continue;
    }

    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * std::max(std::abs(x[i]), std::abs(xn[i]));
      e += (err[i] / sk) * (err[i] / sk);
    }
    e = std::sqrt(e / static_cast<double>(N));

    const double fac11 = std::pow(std::max(e, 1e-300), expo1);
    if (e <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 1.0 / facr, 1.0 / facl);
      double hnew = h / fac;
      facold = std::max(e, 1e-4);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      ++sol.accepted;

      DenseStep<N> ds;
      ds.t = t;
      ds.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = xn[i] - x[i];
        const double bspl = h * k1[i] - ydiff;
        ds.r[0][i] = x[i];
        ds.r[1][i] = ydiff;
        ds.r[2][i] = bspl;
        ds.r[3][i] = ydiff - h * k7[i] - bspl;
        ds.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      while (next_grid < n_grid && grid_time(next_grid) < tn) {
        const double tg = grid_time(next_grid++);
        if (tg > sol.t.back()) {
          sol.t.push_back(tg);
          sol.x.push_back(ds(tg));
        }
      }
      bool on_grid = false;
      if (next_grid < n_grid && grid_time(next_grid) == tn) {
        ++next_grid;
        on_grid = true;
      }
      if ((opt.include_steps || on_grid || final_step) && tn > sol.t.back()) {
        sol.t.push_back(tn);
        sol.x.push_back(xn);
      }

      t = tn;
      x = xn;
      k1 = k7;
      h = hnew;
    } else {
      ++sol.rejected;
      h /= std::min(1.0 / facl, fac11 / safe);
      last_rejected = true;
    }
  }
  return sol;
}

}  // namespace goodwin::ode
