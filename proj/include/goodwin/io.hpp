#pragma once

#include <charconv>
#include <complex>
#include <ostream>
#include <string>

#include "goodwin/config.hpp"
#include "goodwin/dynamics.hpp"
#include "goodwin/equilibrium.hpp"
#include "goodwin/oscillation.hpp"
#include "goodwin/stability.hpp"

namespace goodwin {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,R,L,T\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& s = tr.states[i];
    os << format_double(tr.times[i]) << ',' << format_double(s.R) << ',' << format_double(s.L) << ','
       << format_double(s.T) << '\n';
  }
}

inline json to_json(const EquilibriumPoint& e) {
  return json{{"R0", e.R0}, {"L0", e.L0}, {"T0", e.T0}, {"residual", e.residual}};
}

inline json to_json(const Complex& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json to_json(const StabilityReport& r) {
  json eig = json::array();
  for (const auto& z : r.eigenvalues) eig.push_back(to_json(z));
  return json{{"theta0", r.theta0},
              {"a1", r.a1},
              {"a2", r.a2},
              {"a3", r.a3},
              {"eigenvalues", eig},
              {"verdict", to_string(r.verdict)},
              {"critical_tolerance", r.critical_tolerance},
              {"pair_real_part_bound", r.pair_real_part_bound},
              {"eigenvalue_structure_ok", r.structure_ok}};
}

inline json to_json(const Theorem1Verdict& v) {
  json j{{"supM", v.supM}, {"class", to_string(v.cls)}};
  j["argmaxT"] = std::isfinite(v.argmaxT) ? json(v.argmaxT) : json("inf");
  return j;
}

inline json to_json(const OscillationReport& r) {
  static constexpr const char* names[] = {"R", "L", "T"};
  json comps = json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& c = r.components[k];
    comps[names[k]] = json{{"liminf", c.liminf}, {"limsup", c.limsup}, {"mean", c.mean}, {"y_oscillatory", c.oscillatory}};
  }
  json j{{"tail_start", r.tail_start}, {"components", comps}, {"y_oscillatory", r.y_oscillatory}};
  if (r.amplitude) j["amplitude"] = json{{"R", (*r.amplitude)[0]}, {"L", (*r.amplitude)[1]}, {"T", (*r.amplitude)[2]}};
  if (r.period) {
    j["period"] = *r.period;
    j["period_std"] = *r.period_std;
    j["cycles"] = r.cycles;
  }
  j["omega_class"] = to_string(r.omega_class);
  return j;
}

inline json to_json(const TridiagonalCheck& c) {
  json j{{"slope_bound", c.slope_bound},
         {"sup_abs_f2_prime", std::isfinite(c.sup_abs_f2_prime) ? json(c.sup_abs_f2_prime) : json("inf")},
         {"argsup", c.argsup},
         {"satisfied", c.satisfied},
         {"strict_f1", c.strict_f1},
         {"sign_conditions_hold", c.sign_conditions_hold}};
  if (c.shift_a) j["shift_a"] = *c.shift_a;
  if (c.quadratic_at_shift) j["quadratic_at_shift"] = *c.quadratic_at_shift;
  if (c.min_dh1_dx0) j["min_dh1_dx0"] = *c.min_dh1_dx0;
  return j;
}

}  // namespace goodwin
