#pragma once

// Oscillation analysis of trajectories: Yakubovich oscillation flags,
// amplitude and period of the effector-hormone rhythm, omega-limit
// classification, and the slope condition under which the model can be
// rewritten as a tridiagonal (Mallet-Parret) system.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "goodwin/dynamics.hpp"
#include "goodwin/equilibrium.hpp"
#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"
#include "goodwin/stability.hpp"

namespace goodwin {

class InsufficientPeaks : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class OmegaClass { equilibrium, periodic, undetermined };

inline const char* to_string(OmegaClass c) {
  switch (c) {
    case OmegaClass::equilibrium: return "equilibrium";
    case OmegaClass::periodic: return "periodic";
    case OmegaClass::undetermined: return "undetermined";
  }
  return "?";
}

inline constexpr double kDefaultTailFraction = 0.5;
inline constexpr double kDefaultOscillationThreshold = 1e-4;

struct ComponentStats {
  double liminf{};
  double limsup{};
  double mean{};
  bool oscillatory{};

  double gap() const { return limsup - liminf; }
};

struct OscillationReport {
  double tail_start{};
  std::array<ComponentStats, 3> components{};  // R, L, T
  bool y_oscillatory{};
  std::optional<std::array<double, 3>> amplitude;
  std::optional<double> period;
  std::optional<double> period_std;
  std::size_t cycles{};
  OmegaClass omega_class{OmegaClass::undetermined};
};

/// Refined local maxima of one signal.
struct Peaks {
  std::vector<double> times;
  std::vector<double> values;
};

namespace detail {

inline std::size_t tail_begin(const std::vector<double>& times, double tail_fraction, double* tail_start = nullptr) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("tail_fraction must lie in (0, 1]");
  if (times.size() < 2) throw TrajectoryTooShort("trajectory has fewer than two samples");
  const double t0 = times.front();
  const double start = times.back() - tail_fraction * (times.back() - t0);
  if (tail_start) *tail_start = start;
  return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), start) - times.begin());
}

// Vertex of the parabola through three samples, with y1 the largest.
inline std::pair<double, double> parabola_vertex(double t0, double y0, double t1, double y1, double t2, double y2) {
  const double d1 = (y1 - y0) / (t1 - t0);
  const double d2 = (y2 - y1) / (t2 - t1);
  const double a = (d2 - d1) / (t2 - t0);
  if (!(a < 0.0)) return {t1, y1};
  const double tv = std::clamp(0.5 * (t0 + t1) - d1 / (2.0 * a), t0, t2);
  return {tv, y0 + d1 * (tv - t0) + a * (tv - t0) * (tv - t1)};
}

}  // namespace detail

/// One maximum per cycle of `values` on [first, end). A cycle is an excursion
/// above the upper hysteresis level (mid + 10% of range) that is entered from
/// below the lower level and left again; partial excursions at either end of
/// the window are dropped. Maxima are refined by parabolic interpolation.
inline Peaks find_cycle_peaks(const std::vector<double>& times, const std::vector<double>& values,
                              std::size_t first = 0) {
  Peaks out;
  const std::size_t n = values.size();
  if (n < first + 3) return out;
  const auto [mn_it, mx_it] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(first), values.end());
  const double lo = *mn_it;
  const double hi = *mx_it;
  const double range = hi - lo;
  if (!(range > 0.0)) return out;
  const double mid = 0.5 * (lo + hi);
  const double upper = mid + 0.1 * range;
  const double lower = mid - 0.1 * range;

  bool armed = false;  // seen a sample below `lower` since the last cycle
  bool inside = false;
  std::size_t best = 0;
  for (std::size_t i = first; i < n; ++i) {
    const double v = values[i];
    if (!inside) {
      if (v < lower) armed = true;
      if (armed && v > upper) {
        inside = true;
        best = i;
      }
    } else {
      if (v > values[best]) best = i;
      if (v < lower) {
        inside = false;
        if (best > first && best + 1 < n) {
          const auto [tv, yv] = detail::parabola_vertex(times[best - 1], values[best - 1], times[best], values[best],
                                                        times[best + 1], values[best + 1]);
          out.times.push_back(tv);
          out.values.push_back(yv);
        } else {
          out.times.push_back(times[best]);
          out.values.push_back(values[best]);
        }
      }
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> component(const Trajectory& tr, int k) {
  std::vector<double> v(tr.states.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = tr.states[i].to_array()[static_cast<std::size_t>(k)];
  return v;
}

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

inline std::vector<double> diffs(const std::vector<double>& v) {
  std::vector<double> d;
  for (std::size_t i = 1; i < v.size(); ++i) d.push_back(v[i] - v[i - 1]);
  return d;
}

inline double coefficient_of_variation(const std::vector<double>& v) {
  const auto [m, s] = mean_std(v);
  return m != 0.0 ? s / std::abs(m) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Estimates liminf / limsup of each component as min / max over the last
/// `tail_fraction` of the time span. A component oscillates when its gap
/// exceeds threshold * (1 + |mean|). Throws TrajectoryTooShort when the tail
/// has fewer than 8 samples or covers fewer than five detected periods.
inline OscillationReport detect_y_oscillation(const Trajectory& tr, double tail_fraction = kDefaultTailFraction,
                                              double threshold = kDefaultOscillationThreshold) {
  OscillationReport rep;
  const std::size_t first = detail::tail_begin(tr.times, tail_fraction, &rep.tail_start);
  if (tr.size() - first < 8) throw TrajectoryTooShort("trajectory tail has fewer than 8 samples");

  for (int k = 0; k < 3; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (std::size_t i = first; i < tr.size(); ++i) {
      const double v = tr.states[i].to_array()[static_cast<std::size_t>(k)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    auto& c = rep.components[static_cast<std::size_t>(k)];
    c.liminf = lo;
    c.limsup = hi;
    c.mean = sum / static_cast<double>(tr.size() - first);
    c.oscillatory = c.gap() > threshold * (1.0 + std::abs(c.mean));
  }
  rep.y_oscillatory = std::any_of(rep.components.begin(), rep.components.end(),
                                  [](const ComponentStats& c) { return c.oscillatory; });

  if (rep.y_oscillatory) {
    const Peaks pk = find_cycle_peaks(tr.times, detail::component(tr, 2), first);
    if (pk.times.size() >= 2) {
      const double period = (pk.times.back() - pk.times.front()) / static_cast<double>(pk.times.size() - 1);
      if (tr.t_end() - rep.tail_start < 5.0 * period) {
        throw TrajectoryTooShort("trajectory tail spans fewer than five oscillation periods");
      }
    }
  }
  return rep;
}

struct AmplitudePeriod {
  std::array<double, 3> amplitude{};  // tail max - tail min for R, L, T
  double period{};                    // mean spacing of successive T maxima
  double period_std{};                // cycle-to-cycle standard deviation
  Peaks peaks;                        // T maxima in the tail
};

inline AmplitudePeriod measure_amplitude_period(const Trajectory& tr, double tail_fraction = kDefaultTailFraction) {
  const std::size_t first = detail::tail_begin(tr.times, tail_fraction);
  AmplitudePeriod out;
  for (int k = 0; k < 3; ++k) {
    const auto v = detail::component(tr, k);
    const auto [mn, mx] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(first), v.end());
    out.amplitude[static_cast<std::size_t>(k)] = *mx - *mn;
  }
  out.peaks = find_cycle_peaks(tr.times, detail::component(tr, 2), first);
  if (out.peaks.times.size() < 3) throw InsufficientPeaks("fewer than 3 peaks detected in the trajectory tail");
  const auto intervals = detail::diffs(out.peaks.times);
  const auto [m, s] = detail::mean_std(intervals);
  out.period = m;
  out.period_std = s;
  return out;
}

struct OmegaLimitOptions {
  double tol = 1e-6;  // scaled distance to the equilibrium treated as convergence
  double tail_fraction = kDefaultTailFraction;
  double max_cv = 0.01;
  std::size_t min_peaks = 4;
};

namespace detail {

inline double scaled_distance(const State& x, const EquilibriumPoint& eq) {
  const auto a = x.to_array();
  const auto e = eq.state().to_array();
  double d = 0.0;
  for (std::size_t k = 0; k < 3; ++k) d = std::max(d, std::abs(a[k] - e[k]) / (1.0 + std::abs(e[k])));
  return d;
}

}  // namespace detail

/// equilibrium: the tail stays within tol of the equilibrium.
/// periodic: T peak spacings, peak heights and per-cycle swings all have
/// coefficient of variation below max_cv, and the tail keeps clear of the
/// equilibrium.
/// undetermined: everything else, including homoclinic-like approaches to the
/// equilibrium and unresolved transients.
inline OmegaClass classify_omega_limit(const Trajectory& tr, const EquilibriumPoint& eq,
                                       const OmegaLimitOptions& opt = {}) {
  const std::size_t first = detail::tail_begin(tr.times, opt.tail_fraction);
  if (first >= tr.size()) return OmegaClass::undetermined;
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (std::size_t i = first; i < tr.size(); ++i) {
    const double d = detail::scaled_distance(tr.states[i], eq);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmax <= opt.tol) return OmegaClass::equilibrium;

  const auto T = detail::component(tr, 2);
  const Peaks maxima = find_cycle_peaks(tr.times, T, first);
  if (maxima.times.size() < opt.min_peaks) return OmegaClass::undetermined;
  std::vector<double> negT(T.size());
  std::transform(T.begin(), T.end(), negT.begin(), [](double v) { return -v; });
  const Peaks minima = find_cycle_peaks(tr.times, negT, first);

  // swing of each cycle: maximum minus the next minimum
  std::vector<double> swings;
  std::size_t j = 0;
  for (std::size_t i = 0; i < maxima.times.size(); ++i) {
    while (j < minima.times.size() && minima.times[j] <= maxima.times[i]) ++j;
    if (j < minima.times.size()) swings.push_back(maxima.values[i] + minima.values[j]);
  }

  const bool stable_spacing = detail::coefficient_of_variation(detail::diffs(maxima.times)) < opt.max_cv;
  const bool stable_heights = detail::coefficient_of_variation(maxima.values) < opt.max_cv;
  const bool stable_swings = swings.size() >= 2 && detail::coefficient_of_variation(swings) < opt.max_cv;
  const bool clear_of_equilibrium = dmin > opt.tol && dmin > 0.01 * dmax;
  if (stable_spacing && stable_heights && stable_swings && clear_of_equilibrium) return OmegaClass::periodic;
  return OmegaClass::undetermined;
}

/// Full report: oscillation flags, amplitude / period when oscillating, and
/// omega-limit class.
inline OscillationReport analyze_trajectory(const Trajectory& tr, const EquilibriumPoint& eq,
                                            double tail_fraction = kDefaultTailFraction,
                                            double threshold = kDefaultOscillationThreshold,
                                            OmegaLimitOptions omega = {}) {
  OscillationReport rep = detect_y_oscillation(tr, tail_fraction, threshold);
  if (rep.y_oscillatory) {
    try {
      const auto ap = measure_amplitude_period(tr, tail_fraction);
      rep.amplitude = ap.amplitude;
      rep.period = ap.period;
      rep.period_std = ap.period_std;
      rep.cycles = ap.peaks.times.size();
    } catch (const InsufficientPeaks&) {
    }
  }
  omega.tail_fraction = tail_fraction;
  rep.omega_class = classify_omega_limit(tr, eq, omega);
  // Periodic orbits are Y-oscillatory; an equilibrium verdict excludes oscillation.
  if (rep.omega_class == OmegaClass::equilibrium) rep.y_oscillatory = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Slope condition for the tridiagonal change of variables
//   x0 = T, x1 = L + a T, x2 = R.

struct TridiagonalCheck {
  double slope_bound{};        // (b3 - b2)^2 / (4 g2)
  double sup_abs_f2_prime{};   // over [0, t_max]
  double argsup{};             // where it is attained
  bool satisfied{};            // sup_abs_f2_prime <= slope_bound
  std::optional<double> shift_a;          // (b2 - b3) / (2 g2), when satisfied
  std::optional<double> quadratic_at_shift;  // a (b2 - b3) - g2 a^2 - sup|f2'|
  std::optional<double> min_dh1_dx0;      // sampled min of a (b2 - b3) - g2 a^2 + f2'(x0)
  bool strict_f1{};            // f1' < 0 everywhere sampled
  bool sign_conditions_hold{};
};

/// sup over [0, t_max] of |f'|: closed form for Hill and constant feedbacks,
/// log-grid scan with golden refinement otherwise. Returns (argsup, sup).
inline std::pair<double, double> sup_abs_derivative(const FeedbackSpec& f, double t_max = 1e3,
                                                    std::size_t grid_size = 10000) {
  if (f.kind() == FeedbackKind::constant) return {0.0, 0.0};
  if (f.kind() == FeedbackKind::hill) {
    const auto& h = *f.hill_parameters();
    if (h.n < 1.0) return {0.0, std::numeric_limits<double>::infinity()};
    if (h.n == 1.0) return {0.0, h.K * h.beta};
    // maximizer: beta T^n = (n - 1) / (n + 1)
    const double T = std::pow((h.n - 1.0) / ((h.n + 1.0) * h.beta), 1.0 / h.n);
    if (T <= t_max) return {T, -f.derivative_unchecked(T)};
    return {t_max, -f.derivative_unchecked(t_max)};
  }
  auto g = [&](double T) { return std::abs(f.derivative_unchecked(T)); };
  auto best = detail::scan_maximum(g, t_max, grid_size);
  const double at0 = g(0.0);
  if (at0 >= best.second) return {0.0, at0};
  return best;
}

inline TridiagonalCheck mallet_parret_condition(const ModelInstance& model, double t_max = 1e3,
                                                std::size_t grid_size = 10000) {
  const auto& p = model.params();
  TridiagonalCheck c;
  c.slope_bound = (p.b3 - p.b2) * (p.b3 - p.b2) / (4.0 * p.g2);
  const auto [arg, sup] = sup_abs_derivative(model.f2(), t_max, grid_size);
  c.argsup = arg;
  c.sup_abs_f2_prime = sup;
  c.satisfied = sup <= c.slope_bound;

  switch (model.f1().kind()) {
    case FeedbackKind::hill: c.strict_f1 = true; break;
    case FeedbackKind::constant: c.strict_f1 = false; break;
    case FeedbackKind::custom: {
      c.strict_f1 = true;
      for (std::size_t i = 1; i <= grid_size && c.strict_f1; ++i) {
        const double T = t_max * static_cast<double>(i) / static_cast<double>(grid_size);
        if (!(model.f1().derivative_unchecked(T) < 0.0)) c.strict_f1 = false;
      }
      break;
    }
  }

  if (c.satisfied) {
    const double a = (p.b2 - p.b3) / (2.0 * p.g2);
    const double base = a * (p.b2 - p.b3) - p.g2 * a * a;
    c.shift_a = a;
    c.quadratic_at_shift = base - sup;
    double mn = base + model.f2().derivative_unchecked(arg);
    for (std::size_t i = 0; i <= grid_size; ++i) {
      const double T = t_max * static_cast<double>(i) / static_cast<double>(grid_size);
      mn = std::min(mn, base + model.f2().derivative_unchecked(T));
    }
    c.min_dh1_dx0 = mn;
    const double slack = 1e-12 * std::max(1.0, c.slope_bound);
    c.sign_conditions_hold = mn >= -slack && p.g1 > 0.0 && p.g2 > 0.0 && c.strict_f1;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Sampling many initial conditions.

/// Axis-aligned box of initial states.
struct Box {
  State lo;
  State hi;
};

/// [0, scale R0] x [0, scale L0] x [0, scale T0]
inline Box box_around(const EquilibriumPoint& eq, double scale = 2.0) {
  return {{0.0, 0.0, 0.0}, {scale * eq.R0, scale * eq.L0, scale * eq.T0}};
}

inline std::vector<State> sample_initial_states(const Box& box, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<State> out(n);
  for (auto& s : out) {
    s.R = box.lo.R + (box.hi.R - box.lo.R) * u(rng);
    s.L = box.lo.L + (box.hi.L - box.lo.L) * u(rng);
    s.T = box.lo.T + (box.hi.T - box.lo.T) * u(rng);
  }
  return out;
}

/// Runs fn(i) for i in [0, n) on `jobs` threads. fn must be safe to call
/// concurrently for distinct i.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct SamplingOptions {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  IntegrationOptions integration{};
  double tail_fraction = kDefaultTailFraction;
  double threshold = kDefaultOscillationThreshold;
};

struct SamplingResult {
  std::size_t n_samples = 0;
  std::size_t n_oscillatory = 0;
  std::size_t n_failed = 0;         // integrator or analysis errors
  std::optional<double> fraction;   // empty when nothing could be evaluated
  std::vector<State> starts;
  std::vector<int> flags;           // 1 oscillatory, 0 not, -1 failed
};

/// Integrates from n_samples uniform random starts in `box` and reports the
/// fraction flagged Y-oscillatory among the runs that completed.
inline SamplingResult sample_oscillation_fraction(const ModelInstance& model, std::size_t n_samples, const Box& box,
                                                  double t_end, const SamplingOptions& opt = {}) {
  SamplingResult res;
  res.n_samples = n_samples;
  res.starts = sample_initial_states(box, n_samples, opt.seed);
  res.flags.assign(n_samples, -1);
  parallel_for(n_samples, opt.jobs, [&](std::size_t i) {
    try {
      const Trajectory tr = integrate(model, res.starts[i], t_end, opt.integration);
      res.flags[i] = detect_y_oscillation(tr, opt.tail_fraction, opt.threshold).y_oscillatory ? 1 : 0;
    } catch (const Error&) {
      res.flags[i] = -1;
    }
  });
  for (int f : res.flags) {
    if (f < 0) ++res.n_failed;
    if (f > 0) ++res.n_oscillatory;
  }
  const std::size_t evaluated = n_samples - res.n_failed;
  if (evaluated > 0) res.fraction = static_cast<double>(res.n_oscillatory) / static_cast<double>(evaluated);
  return res;
}

}  // namespace goodwin
