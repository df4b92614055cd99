#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"
#include "goodwin/ode.hpp"

namespace goodwin {

struct IntegrationOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t output_points = 20001;  // equidistant samples over [0, t_end]
  bool include_steps = true;          // also keep every accepted step point
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Sampled solution (R, L, T)(t) on [0, t_end].
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  double rtol = 0.0;
  double atol = 0.0;
  StepStats steps;

  std::size_t size() const { return times.size(); }
  double t_end() const { return times.empty() ? 0.0 : times.back(); }
};

inline void check_initial_state(const State& x0) {
  for (double v : x0.to_array()) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("initial state must be finite and in the nonnegative octant");
  }
}

/// Adaptive Dormand-Prince solution of the model from x0. Steps ending with a
/// component below -atol are rejected, never clipped.
inline Trajectory integrate(const ModelInstance& model, const State& x0, double t_end,
                            const IntegrationOptions& options = {}) {
  check_initial_state(x0);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive and finite");

  ode::Options o;
  o.rtol = options.rtol;
  o.atol = options.atol;
  o.max_step = options.max_step;
  o.output_points = options.output_points;
  o.include_steps = options.include_steps;

  auto rhs = [&model](double, const ode::Vec<3>& x) { return vector_field(model, State::from_array(x)).to_array(); };
  const double floor = -options.atol;
  auto admissible = [floor](const ode::Vec<3>& x) { return x[0] >= floor && x[1] >= floor && x[2] >= floor; };

  auto sol = ode::dopri5<3>(rhs, 0.0, x0.to_array(), t_end, o, admissible);

  Trajectory tr;
  tr.times = std::move(sol.t);
  tr.states.reserve(sol.x.size());
  for (const auto& x : sol.x) tr.states.push_back(State::from_array(x));
  tr.rtol = options.rtol;
  tr.atol = options.atol;
  tr.steps = {sol.accepted, sol.rejected};
  return tr;
}

}  // namespace goodwin
