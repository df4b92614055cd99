#pragma once

// Two-feedback Goodwin model of a hypothalamic-pituitary axis:
//
//   dR/dt = -b1 R + f1(T)
//   dL/dt =  g1 R - b2 L + f2(T)
//   dT/dt =  g2 L - b3 T
//
// With f2 identically zero this is the classical Goodwin oscillator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "goodwin/errors.hpp"

namespace goodwin {

namespace detail {

/// 1 / (1 + exp(-x)) without overflow for either sign of x.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace detail

/// Clearing rates b1..b3 and feedforward gains g1, g2 (all 1/time).
struct ModelParameters {
  double b1{};
  double b2{};
  double b3{};
  double g1{};
  double g2{};

  void validate() const {
    if (!detail::positive_finite(b1) || !detail::positive_finite(b2) ||
        !detail::positive_finite(b3) || !detail::positive_finite(g1) ||
        !detail::positive_finite(g2)) {
      throw DomainError("model parameters b1, b2, b3, g1, g2 must be positive and finite");
    }
  }

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Symmetric sums of the clearing rates.
struct CoefficientSums {
  double a1;  // b1 + b2 + b3
  double a2;  // b1 b2 + b1 b3 + b2 b3
  double a3;  // b1 b2 b3
};

inline CoefficientSums coefficient_sums(double b1, double b2, double b3) {
  return {b1 + b2 + b3, b1 * b2 + b1 * b3 + b2 * b3, b1 * b2 * b3};
}

inline CoefficientSums coefficient_sums(const ModelParameters& p) {
  return coefficient_sums(p.b1, p.b2, p.b3);
}

struct HillParameters {
  double K;
  double beta;
  double n;

  friend bool operator==(const HillParameters&, const HillParameters&) = default;
};

namespace detail {

inline void check_hill(double K, double beta, double n) {
  if (!positive_finite(K) || !positive_finite(beta) || !positive_finite(n)) {
    throw DomainError("Hill parameters K, beta, n must be positive and finite");
  }
}

// ln(beta T^n); T > 0.
inline double hill_log_u(double beta, double n, double T) { return std::log(beta) + n * std::log(T); }

// The three helpers below take T >= 0 and validated parameters.
inline double hill_value(const HillParameters& h, double T) {
  if (T == 0.0) return h.K;
  return h.K * logistic(-hill_log_u(h.beta, h.n, T));
}

inline double hill_derivative(const HillParameters& h, double T) {
  if (T == 0.0) {
    if (h.n > 1.0) return 0.0;
    if (h.n == 1.0) return -h.K * h.beta;
    return -std::numeric_limits<double>::infinity();
  }
  // -K n u / (T (1+u)^2) written with logistic factors so that huge u gives 0, not NaN.
  const double lu = hill_log_u(h.beta, h.n, T);
  return -(h.K * h.n / T) * logistic(lu) * logistic(-lu);
}

// -T f'(T) / f(T) = n u / (1+u)
inline double hill_log_slope(const HillParameters& h, double T) {
  if (T == 0.0) return 0.0;
  return h.n * logistic(hill_log_u(h.beta, h.n, T));
}

}  // namespace detail

/// K / (1 + beta T^n). Evaluated in log space, so it underflows cleanly to 0
/// when beta T^n exceeds the double range.
inline double eval_hill(double K, double beta, double n, double T) {
  detail::check_hill(K, beta, n);
  if (!(T >= 0.0)) throw DomainError("Hill function evaluated at negative concentration");
  return detail::hill_value({K, beta, n}, T);
}

enum class FeedbackKind { hill, constant, custom };

enum class Positivity { strictly_positive, nonnegative };

inline const char* to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::hill: return "hill";
    case FeedbackKind::constant: return "constant";
    case FeedbackKind::custom: return "custom";
  }
  return "?";
}

/// Sampling grid used to check admissibility of user-supplied feedbacks.
struct AdmissibilityGrid {
  std::size_t points = 10000;
  double t_max = 1e3;
};

/// A non-increasing feedback nonlinearity T -> f(T) >= 0 together with its
/// derivative.
class FeedbackSpec {
 public:
  using Function = std::function<double(double)>;

  static FeedbackSpec hill(double K, double beta, double n) {
    detail::check_hill(K, beta, n);
    FeedbackSpec s;
    s.kind_ = FeedbackKind::hill;
    s.hill_ = HillParameters{K, beta, n};
    s.positivity_ = Positivity::strictly_positive;
    return s;
  }

  static FeedbackSpec constant(double c) {
    if (!(std::isfinite(c) && c >= 0.0)) throw DomainError("constant feedback must be finite and nonnegative");
    FeedbackSpec s;
    s.kind_ = FeedbackKind::constant;
    s.constant_ = c;
    s.positivity_ = c > 0.0 ? Positivity::strictly_positive : Positivity::nonnegative;
    return s;
  }

  static FeedbackSpec zero() { return constant(0.0); }

  /// Caller supplies both f and f'. Admissibility is checked by sampling.
  static FeedbackSpec custom(Function f, Function df, Positivity positivity,
                             AdmissibilityGrid grid = {}) {
    if (!f || !df) throw DomainError("custom feedback needs both a value and a derivative function");
    FeedbackSpec s;
    s.kind_ = FeedbackKind::custom;
    s.f_ = std::move(f);
    s.df_ = std::move(df);
    s.positivity_ = positivity;
    s.check_admissible(positivity, grid);
    return s;
  }

  FeedbackKind kind() const { return kind_; }
  Positivity positivity() const { return positivity_; }
  const std::optional<HillParameters>& hill_parameters() const { return hill_; }
  double constant_value() const { return constant_; }
  bool identically_zero() const { return kind_ == FeedbackKind::constant && constant_ == 0.0; }

  double operator()(double T) const {
    if (!(T >= 0.0)) throw DomainError("feedback evaluated at negative concentration");
    return value_unchecked(T);
  }

  double derivative(double T) const {
    if (!(T >= 0.0)) throw DomainError("feedback derivative evaluated at negative concentration");
    return derivative_unchecked(T);
  }

  /// f multiplied by a nonnegative gain; a zero gain gives f == 0.
  FeedbackSpec scaled(double gain) const {
    if (!(std::isfinite(gain) && gain >= 0.0)) throw DomainError("feedback gain must be finite and nonnegative");
    if (gain == 0.0) return zero();
    switch (kind_) {
      case FeedbackKind::hill: return hill(hill_->K * gain, hill_->beta, hill_->n);
      case FeedbackKind::constant: return constant(constant_ * gain);
      case FeedbackKind::custom: {
        FeedbackSpec s = *this;
        s.f_ = [f = f_, gain](double T) { return gain * f(T); };
        s.df_ = [df = df_, gain](double T) { return gain * df(T); };
        return s;
      }
    }
    return *this;
  }

  /// Throws DomainError unless f meets the positivity class and is
  /// non-increasing. Hill and constant feedbacks are admissible by
  /// construction; custom ones are sampled on [0, grid.t_max].
  void check_admissible(Positivity required, AdmissibilityGrid grid = {}) const {
    if (required == Positivity::strictly_positive && positivity_ != Positivity::strictly_positive) {
      throw DomainError("feedback must be strictly positive");
    }
    if (kind_ != FeedbackKind::custom) return;
    if (grid.points < 2 || !(grid.t_max > 0.0)) throw DomainError("admissibility grid needs >= 2 points on (0, t_max]");
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.points; ++i) {
      const double T = grid.t_max * static_cast<double>(i) / static_cast<double>(grid.points - 1);
      const double v = f_(T);
      const double d = df_(T);
      if (!std::isfinite(v) || std::isnan(d)) throw DomainError("custom feedback is not finite at T = " + std::to_string(T));
      if (v < 0.0 || (required == Positivity::strictly_positive && v <= 0.0)) {
        throw DomainError("custom feedback violates positivity at T = " + std::to_string(T));
      }
      if (d > 0.0) throw DomainError("custom feedback derivative is positive at T = " + std::to_string(T));
      const double slack = 1e-12 * std::max(1.0, std::abs(prev));
      if (v > prev + slack) throw DomainError("custom feedback is increasing near T = " + std::to_string(T));
      prev = v;
    }
  }

  // Unchecked evaluation for hot loops; T must be >= 0.
  double value_unchecked(double T) const {
    switch (kind_) {
      case FeedbackKind::hill: return detail::hill_value(*hill_, T);
      case FeedbackKind::constant: return constant_;
      case FeedbackKind::custom: return f_(T);
    }
    return 0.0;
  }

  double derivative_unchecked(double T) const {
    switch (kind_) {
      case FeedbackKind::hill: return detail::hill_derivative(*hill_, T);
      case FeedbackKind::constant: return 0.0;
      case FeedbackKind::custom: return df_(T);
    }
    return 0.0;
  }

 private:
  FeedbackSpec() = default;

  FeedbackKind kind_ = FeedbackKind::constant;
  Positivity positivity_ = Positivity::nonnegative;
  std::optional<HillParameters> hill_;
  double constant_ = 0.0;
  Function f_;
  Function df_;
};

/// Concentrations of releasing (R), tropic (L) and effector (T) hormone.
struct State {
  double R{};
  double L{};
  double T{};

  std::array<double, 3> to_array() const { return {R, L, T}; }
  static State from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

  friend bool operator==(const State&, const State&) = default;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Parameters plus the two feedbacks. f1 must be strictly positive, f2
/// nonnegative, both non-increasing. Immutable after construction.
class ModelInstance {
 public:
  ModelInstance(ModelParameters params, FeedbackSpec f1, FeedbackSpec f2 = FeedbackSpec::zero(),
                AdmissibilityGrid grid = {})
      : params_(params), f1_(std::move(f1)), f2_(std::move(f2)) {
    params_.validate();
    f1_.check_admissible(Positivity::strictly_positive, grid);
    f2_.check_admissible(Positivity::nonnegative, grid);
  }

  const ModelParameters& params() const { return params_; }
  const FeedbackSpec& f1() const { return f1_; }
  const FeedbackSpec& f2() const { return f2_; }
  bool is_classical() const { return f2_.identically_zero(); }

  ModelInstance with_params(const ModelParameters& p) const { return ModelInstance(p, f1_, f2_, no_sampling()); }

 private:
  static AdmissibilityGrid no_sampling() { return {2, 1.0}; }

  ModelParameters params_;
  FeedbackSpec f1_;
  FeedbackSpec f2_;
};

// Feedbacks live on [0, inf). Runge-Kutta stages may probe slightly negative
// T; they see the boundary value.
inline double feedback_argument(double T) { return T > 0.0 ? T : 0.0; }

inline State vector_field(const ModelInstance& model, const State& x) {
  const auto& p = model.params();
  const double T = feedback_argument(x.T);
  return {-p.b1 * x.R + model.f1().value_unchecked(T),
          p.g1 * x.R - p.b2 * x.L + model.f2().value_unchecked(T),
          p.g2 * x.L - p.b3 * x.T};
}

inline Matrix3 jacobian(const ModelInstance& model, const State& x) {
  const auto& p = model.params();
  const double T = feedback_argument(x.T);
  return {{{-p.b1, 0.0, model.f1().derivative_unchecked(T)},
           {p.g1, -p.b2, model.f2().derivative_unchecked(T)},
           {0.0, p.g2, -p.b3}}};
}

}  // namespace goodwin
