// goodwin: command-line front end for the two-feedback Goodwin model.
//
// Exit codes: 0 success, 1 comparison failure, 2 usage or parse error,
// 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "goodwin/config.hpp"
#include "goodwin/dynamics.hpp"
#include "goodwin/equilibrium.hpp"
#include "goodwin/hopf.hpp"
#include "goodwin/io.hpp"
#include "goodwin/oscillation.hpp"
#include "goodwin/reproduce.hpp"
#include "goodwin/stability.hpp"

namespace fs = std::filesystem;
using namespace goodwin;

namespace {

enum ExitCode : int { kOk = 0, kComparisonFailure = 1, kUsage = 2, kNumerical = 3 };

struct ModelSource {
  std::string config_path;
  std::string model_json;
  std::string preset;
};

ModelConfig preset_config(const std::string& name) {
  if (name == "goodwin-smith" || name == "extended") {
    ModelConfig cfg{name == "extended" ? reference::extended() : reference::goodwin_smith()};
    cfg.initial_state = State{1.0, 6.0, 2.0};
    cfg.r_unit = "ng";
    return cfg;
  }
  throw ParseError("unknown preset '" + name + "' (expected goodwin-smith or extended)");
}

ModelConfig resolve_model(const ModelSource& src) {
  const int given = !src.config_path.empty() + !src.model_json.empty() + !src.preset.empty();
  if (given > 1) throw ParseError("give at most one of --config, --model, --preset");
  if (!src.config_path.empty()) return load_model_config(src.config_path);
  if (!src.model_json.empty()) return parse_model_config(src.model_json);
  return preset_config(src.preset.empty() ? "extended" : src.preset);
}

void add_model_options(CLI::App* cmd, ModelSource& src) {
  cmd->add_option("--config", src.config_path, "JSON model definition file");
  cmd->add_option("--model", src.model_json, "inline JSON model definition");
  cmd->add_option("--preset", src.preset, "built-in model: goodwin-smith or extended (default)");
}

// Writes `text` to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json integration_json(const IntegrationOptions& io) {
  json j{{"rtol", io.rtol}, {"atol", io.atol}, {"output_points", io.output_points},
         {"include_steps", io.include_steps}};
  j["max_step"] = std::isfinite(io.max_step) ? json(io.max_step) : json("inf");
  return j;
}

void add_integration_options(CLI::App* cmd, IntegrationOptions& io) {
  cmd->add_option("--rtol", io.rtol, "relative tolerance")->capture_default_str();
  cmd->add_option("--atol", io.atol, "absolute tolerance")->capture_default_str();
  cmd->add_option("--max-step", io.max_step, "largest step size");
  cmd->add_option("--points", io.output_points, "equidistant output samples")->capture_default_str();
}

// Starting state: --x0, else the config's initial_state, else the
// equilibrium displaced by +1%.
State resolve_start(const std::vector<double>& x0, const std::string& r_unit, const ModelConfig& cfg,
                    const EquilibriumPoint& eq, std::string& source) {
  if (!x0.empty()) {
    State s{x0[0], x0[1], x0[2]};
    if (r_unit == "pg") s.R *= 1e-3;
    source = "--x0";
    return s;
  }
  if (cfg.initial_state) {
    State s = *cfg.initial_state;
    const std::string unit = r_unit.empty() ? cfg.r_unit : r_unit;
    if (unit == "pg") s.R *= 1e-3;
    source = "config";
    return s;
  }
  source = "equilibrium+1%";
  return {eq.R0 * 1.01, eq.L0 * 1.01, eq.T0 * 1.01};
}

// ---------------------------------------------------------------------------

struct EquilibriumCmd {
  ModelSource src;
  double tol = kDefaultRootTolerance;
  std::string out;

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    const EquilibriumPoint eq = find_equilibrium(cfg.model, tol);
    json j{{"command", "equilibrium"}, {"config", to_json(cfg)}, {"tolerance", tol}, {"equilibrium", to_json(eq)}};
    emit(out, dump(j));
    std::cerr << "equilibrium: R0=" << eq.R0 << " L0=" << eq.L0 << " T0=" << eq.T0 << " (residual " << eq.residual
              << ")\n";
    return kOk;
  }
};

struct StabilityCmd {
  ModelSource src;
  std::optional<double> critical_tol;
  double t_max = 1e3;
  std::size_t grid = 10000;
  std::string out;

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    const EquilibriumPoint eq = find_equilibrium(cfg.model);
    const StabilityReport rep = classify_local(cfg.model, eq, critical_tol);
    const Theorem1Verdict th = sup_M(cfg.model.f1(), t_max, grid);
    json j{{"command", "stability"},
           {"config", to_json(cfg)},
           {"options", {{"sup_M_t_max", t_max}, {"sup_M_grid", grid}}},
           {"equilibrium", to_json(eq)},
           {"stability", to_json(rep)},
           {"theorem1", to_json(th)}};
    emit(out, dump(j));
    std::cerr << "theta0 = " << rep.theta0 << " -> " << to_string(rep.verdict) << "; sup M = " << th.supM << " ("
              << to_string(th.cls) << ")\n";
    return kOk;
  }
};

struct SimulateCmd {
  ModelSource src;
  IntegrationOptions io;
  double t_end = reference::kSimulationMinutes;
  std::vector<double> x0;
  std::string r_unit;
  std::string out = "trajectory.csv";

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    const EquilibriumPoint eq = find_equilibrium(cfg.model);
    std::string start_source;
    const State start = resolve_start(x0, r_unit, cfg, eq, start_source);
    const Trajectory tr = integrate(cfg.model, start, t_end, io);

    std::ostringstream csv;
    write_trajectory_csv(csv, tr);
    emit(out, csv.str());

    json meta{{"command", "simulate"},
              {"config", to_json(cfg)},
              {"r_unit", r_unit.empty() ? cfg.r_unit : r_unit},
              {"initial_state", to_json(start)},
              {"initial_state_source", start_source},
              {"t_end", t_end},
              {"time_unit", cfg.rate_unit == "1/min" ? "min" : "1/(" + cfg.rate_unit + ")"},
              {"integration", integration_json(io)},
              {"samples", tr.size()},
              {"accepted_steps", tr.steps.accepted},
              {"rejected_steps", tr.steps.rejected},
              {"columns", {"t", "R", "L", "T"}}};
    if (!out.empty() && out != "-") {
      fs::path side(out);
      side.replace_extension(".json");
      emit(side.string(), dump(meta));
    } else {
      std::cerr << dump(meta);
    }
    std::cerr << "simulated " << tr.size() << " samples to t=" << t_end << " (" << tr.steps.accepted << " steps)\n";
    return kOk;
  }
};

struct OscillateCmd {
  ModelSource src;
  IntegrationOptions io;
  double t_end = 2.0 * reference::kSimulationMinutes;
  std::vector<double> x0;
  std::string r_unit;
  double tail_fraction = kDefaultTailFraction;
  double threshold = kDefaultOscillationThreshold;
  double omega_tol = OmegaLimitOptions{}.tol;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double box_scale = 2.0;
  std::string out;

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    const EquilibriumPoint eq = find_equilibrium(cfg.model);
    std::string start_source;
    const State start = resolve_start(x0, r_unit, cfg, eq, start_source);
    const Trajectory tr = integrate(cfg.model, start, t_end, io);
    OmegaLimitOptions om;
    om.tol = omega_tol;
    const OscillationReport rep = analyze_trajectory(tr, eq, tail_fraction, threshold, om);

    json j{{"command", "oscillate"},
           {"config", to_json(cfg)},
           {"options",
            {{"t_end", t_end},
             {"tail_fraction", tail_fraction},
             {"threshold", threshold},
             {"omega_tol", omega_tol},
             {"integration", integration_json(io)}}},
           {"initial_state", to_json(start)},
           {"initial_state_source", start_source},
           {"equilibrium", to_json(eq)},
           {"report", to_json(rep)}};
    if (rep.period && cfg.rate_unit == "1/min") {
      j["report"]["period_hours"] = *rep.period / 60.0;
      j["report"]["period_std_hours"] = *rep.period_std / 60.0;
    }

    if (samples > 0) {
      SamplingOptions so;
      so.seed = seed;
      so.jobs = jobs;
      so.integration = io;
      so.tail_fraction = tail_fraction;
      so.threshold = threshold;
      const auto res = sample_oscillation_fraction(cfg.model, samples, box_around(eq, box_scale), t_end, so);
      j["sampling"] = json{{"n_samples", res.n_samples},
                           {"seed", seed},
                           {"box_scale", box_scale},
                           {"n_oscillatory", res.n_oscillatory},
                           {"n_failed", res.n_failed},
                           {"fraction", res.fraction ? json(*res.fraction) : json(nullptr)}};
    }
    emit(out, dump(j));
    std::cerr << "y-oscillatory: " << (rep.y_oscillatory ? "yes" : "no") << ", omega-limit: "
              << to_string(rep.omega_class) << "\n";
    return kOk;
  }
};

struct MpCheckCmd {
  ModelSource src;
  double t_max = 1e3;
  std::size_t grid = 10000;
  std::string out;

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    const TridiagonalCheck c = mallet_parret_condition(cfg.model, t_max, grid);
    json j{{"command", "mp-check"},
           {"config", to_json(cfg)},
           {"options", {{"t_max", t_max}, {"grid", grid}}},
           {"check", to_json(c)}};
    emit(out, dump(j));
    std::cerr << "sup|f2'| = " << c.sup_abs_f2_prime << ", bound = " << c.slope_bound << " -> "
              << (c.satisfied ? "satisfied" : "violated") << "\n";
    return kOk;
  }
};

struct HopfSweepCmd {
  ModelSource src;
  double b = 1.0;
  std::optional<double> t0;
  double fraction = 0.95;
  double mu_min = -1e-5;
  double mu_max = 1e-5;
  std::size_t points = 11;
  bool simulate = true;
  std::optional<double> t_end;
  unsigned jobs = 1;
  IntegrationOptions io;
  std::string out;

  int run() const {
    const ModelConfig cfg = resolve_model(src);
    if (points < 1) throw DomainError("--points must be >= 1");
    const double T0 = t0 ? *t0 : hill_t0_for_fraction(cfg.model.f1(), fraction);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
      grid[i] = points == 1 ? mu_min
                            : mu_min + (mu_max - mu_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    // keep the mu = 0 row exact when the grid straddles it symmetrically
    for (double& mu : grid) {
      if (std::abs(mu) < 1e-12 * std::max(std::abs(mu_min), std::abs(mu_max))) mu = 0.0;
    }
    const HopfFamily fam = build_family(b, T0, cfg.model.f1(), cfg.model.f2(), grid);
    const double horizon = t_end ? *t_end : 2000.0 / b;

    std::vector<StabilityReport> stab(points);
    std::vector<std::string> osc(points, "skipped");
    parallel_for(points, jobs, [&](std::size_t i) {
      const auto& m = fam.members[i];
      const EquilibriumPoint eq = m.equilibrium(T0);
      stab[i] = classify_local(m.model, eq);
      if (!simulate) return;
      try {
        const Trajectory tr = integrate(m.model, {eq.R0 * 1.01, eq.L0 * 1.01, eq.T0 * 1.01}, horizon, io);
        osc[i] = to_string(analyze_trajectory(tr, eq).omega_class);
      } catch (const Error&) {
        osc[i] = "failed";
      }
    });

    json meta{{"command", "hopf-sweep"},
              {"config", to_json(cfg)},
              {"b", b},
              {"T0", T0},
              {"mu_range", {fam.mu_range.first, fam.mu_range.second}},
              {"g1_at_zero", fam.g1_at_zero},
              {"g2_at_zero", fam.g2_at_zero},
              {"alpha_prime0", fam.alpha_prime0},
              {"simulate", simulate},
              {"t_end", horizon},
              {"integration", integration_json(io)}};

    std::ostringstream csv;
    csv << "mu,g1,g2,theta0,max_re_eigenvalue,stability,oscillation\n";
    for (std::size_t i = 0; i < points; ++i) {
      const auto& m = fam.members[i];
      csv << format_double(m.mu) << ',' << format_double(m.g1) << ',' << format_double(m.g2) << ','
          << format_double(stab[i].theta0) << ',' << format_double(stab[i].pair.real()) << ','
          << to_string(stab[i].verdict) << ',' << osc[i] << '\n';
    }
    if (!out.empty() && out != "-") {
      emit(out, csv.str());
      fs::path side(out);
      side.replace_extension(".json");
      emit(side.string(), dump(meta));
    } else {
      std::cout << "# " << meta.dump() << '\n' << csv.str();
    }
    std::cerr << "hopf family at T0=" << T0 << ": alpha'(0) = " << fam.alpha_prime0 << "\n";
    return kOk;
  }
};

struct ReproduceCmd {
  std::string out_dir = "reproduce-out";
  double f2_gain = 1.0;
  bool skip_limit_cycle = false;
  IntegrationOptions io;

  int run() const {
    reference::ReproductionOptions opt;
    opt.f2_gain = f2_gain;
    opt.integration = io;
    opt.limit_cycle_diagnostics = !skip_limit_cycle;
    const auto rep = reference::reproduce(opt);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    auto rows_json = [](const std::vector<reference::ComparisonRow>& rows) {
      json a = json::array();
      for (const auto& r : rows) {
        a.push_back(json{{"quantity", r.quantity},
                         {"computed", r.computed},
                         {"published", r.published},
                         {"rel_error", r.rel_error},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass}});
      }
      return a;
    };

    json runs = json::array();
    for (const auto& u : rep.runs) {
      auto metrics = [](const reference::RhythmMetrics& m) {
        return json{{"amplitude", {{"R_pg_per_ml", m.amplitude[0]}, {"L", m.amplitude[1]}, {"T", m.amplitude[2]}}},
                    {"period_hours", m.period_hours},
                    {"period_std_hours", m.period_std_hours}};
      };
      runs.push_back(json{{"r_unit", u.r_unit},
                          {"initial_state", to_json(reference::initial_state(u.r_unit))},
                          {"goodwin_smith", metrics(u.gs_metrics)},
                          {"extended", metrics(u.ext_metrics)},
                          {"max_amplitude_error", u.max_amplitude_error},
                          {"matches_published_amplitudes", u.matches_amplitudes}});
      for (const auto& [name, tr] : {std::pair{"goodwin_smith", &u.gs}, std::pair{"extended", &u.ext}}) {
        std::ostringstream csv;
        write_trajectory_csv(csv, *tr);
        emit((dir / ("trajectory_" + std::string(name) + "_" + u.r_unit + ".csv")).string(), csv.str());
      }
    }

    ModelConfig gs_cfg{reference::goodwin_smith()};
    ModelConfig ext_cfg{reference::extended(f2_gain)};
    for (auto* c : {&gs_cfg, &ext_cfg}) c->initial_state = State{1.0, 6.0, 2.0};
    json report{{"command", "reproduce-paper"},
                {"config",
                 {{"goodwin_smith", to_json(gs_cfg)},
                  {"extended", to_json(ext_cfg)},
                  {"f2_gain", f2_gain},
                  {"t_end_minutes", reference::kSimulationMinutes},
                  {"integration", integration_json(io)}}},
                {"equilibria", {{"goodwin_smith", to_json(rep.gs_equilibrium)}, {"extended", to_json(rep.ext_equilibrium)}}},
                {"stability", {{"goodwin_smith", to_json(rep.gs_stability)}, {"extended", to_json(rep.ext_stability)}}},
                {"unit_runs", runs},
                {"chosen_r_unit", rep.chosen_unit},
                {"comparisons", rows_json(rep.rows)},
                {"qualitative_extended_smaller", rep.qualitative_smaller},
                {"diagnostics", rows_json(rep.diagnostics)},
                {"all_pass", rep.all_pass}};
    emit((dir / "report.json").string(), dump(report));

    std::ostringstream table;
    table << "quantity,computed,published,rel_error,tolerance,pass\n";
    for (const auto& r : rep.rows) {
      table << r.quantity << ',' << format_double(r.computed) << ',' << format_double(r.published) << ','
            << format_double(r.rel_error) << ',' << format_double(r.tolerance) << ',' << (r.pass ? "pass" : "FAIL")
            << '\n';
    }
    emit((dir / "comparison.csv").string(), table.str());

    std::cout << std::left;
    for (const auto& r : rep.rows) {
      std::cout << std::setw(14) << r.quantity << std::setw(14) << std::setprecision(6) << r.computed
                << std::setw(12) << r.published << "rel.err " << std::setw(11) << std::setprecision(3)
                << r.rel_error << (r.pass ? "pass" : "FAIL") << '\n';
    }
    std::cout << "extended amplitudes and period below classical: " << (rep.qualitative_smaller ? "yes" : "no")
              << "\nR(0) reading used for rhythm rows: " << rep.chosen_unit << "\n";
    for (const auto& u : rep.runs) {
      std::cout << "  reading " << u.r_unit << ": worst amplitude error " << std::setprecision(3)
                << u.max_amplitude_error << (u.matches_amplitudes ? " (matches)" : " (no match)") << '\n';
    }
    std::cout << "outputs written to " << out_dir << '\n';
    return rep.all_pass ? kOk : kComparisonFailure;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-feedback Goodwin oscillator: equilibria, stability, Hopf families, simulation, oscillation"};
  app.require_subcommand(1);

  EquilibriumCmd eq;
  auto* c_eq = app.add_subcommand("equilibrium", "unique positive equilibrium as JSON");
  add_model_options(c_eq, eq.src);
  c_eq->add_option("--tol", eq.tol, "root tolerance on T")->capture_default_str();
  c_eq->add_option("--out", eq.out, "output file (default stdout)");

  StabilityCmd st;
  auto* c_st = app.add_subcommand("stability", "local stability report and sup M(T) verdict as JSON");
  add_model_options(c_st, st.src);
  c_st->add_option("--critical-tol", st.critical_tol, "|theta0| treated as critical");
  c_st->add_option("--tmax", st.t_max, "search range for sup M")->capture_default_str();
  c_st->add_option("--grid", st.grid, "grid size for sup M")->capture_default_str();
  c_st->add_option("--out", st.out, "output file (default stdout)");

  SimulateCmd sim;
  auto* c_sim = app.add_subcommand("simulate", "integrate a trajectory to CSV (t,R,L,T) plus JSON sidecar");
  add_model_options(c_sim, sim.src);
  add_integration_options(c_sim, sim.io);
  c_sim->add_option("--t-end", sim.t_end, "final time")->capture_default_str();
  c_sim->add_option("--x0", sim.x0, "initial state R,L,T")->expected(3)->delimiter(',');
  c_sim->add_option("--r-unit", sim.r_unit, "unit of the initial R: ng or pg")->check(CLI::IsMember({"ng", "pg"}));
  c_sim->add_option("--out", sim.out, "CSV path ('-' for stdout)")->capture_default_str();

  OscillateCmd osc;
  auto* c_osc = app.add_subcommand("oscillate", "oscillation report (and optional random-start sampling) as JSON");
  add_model_options(c_osc, osc.src);
  add_integration_options(c_osc, osc.io);
  c_osc->add_option("--t-end", osc.t_end, "final time")->capture_default_str();
  c_osc->add_option("--x0", osc.x0, "initial state R,L,T")->expected(3)->delimiter(',');
  c_osc->add_option("--r-unit", osc.r_unit, "unit of the initial R: ng or pg")->check(CLI::IsMember({"ng", "pg"}));
  c_osc->add_option("--tail-fraction", osc.tail_fraction, "analysed fraction of the run")->capture_default_str();
  c_osc->add_option("--threshold", osc.threshold, "relative oscillation threshold")->capture_default_str();
  c_osc->add_option("--omega-tol", osc.omega_tol, "distance counted as convergence")->capture_default_str();
  c_osc->add_option("--samples", osc.samples, "random starts to sample (0: none)")->capture_default_str();
  c_osc->add_option("--seed", osc.seed, "sampling seed")->capture_default_str();
  c_osc->add_option("--jobs", osc.jobs, "worker threads")->capture_default_str();
  c_osc->add_option("--box-scale", osc.box_scale, "sample box [0, s E0]")->capture_default_str();
  c_osc->add_option("--out", osc.out, "output file (default stdout)");

  MpCheckCmd mp;
  auto* c_mp = app.add_subcommand("mp-check", "slope condition for the tridiagonal change of variables as JSON");
  add_model_options(c_mp, mp.src);
  c_mp->add_option("--tmax", mp.t_max, "search range for sup |f2'|")->capture_default_str();
  c_mp->add_option("--grid", mp.grid, "grid size")->capture_default_str();
  c_mp->add_option("--out", mp.out, "output file (default stdout)");

  HopfSweepCmd hs;
  auto* c_hs = app.add_subcommand("hopf-sweep", "Hopf family table as CSV");
  add_model_options(c_hs, hs.src);
  c_hs->add_option("--b", hs.b, "common clearing rate")->capture_default_str();
  c_hs->add_option("--t0", hs.t0, "equilibrium effector level (default: M(T0) = fraction * n)");
  c_hs->add_option("--fraction", hs.fraction, "M(T0) / n for the default T0")->capture_default_str();
  c_hs->add_option("--mu-min", hs.mu_min, "smallest theta0")->capture_default_str();
  c_hs->add_option("--mu-max", hs.mu_max, "largest theta0")->capture_default_str();
  c_hs->add_option("--points", hs.points, "grid points")->capture_default_str();
  c_hs->add_flag("--simulate,!--no-simulate", hs.simulate, "classify each member by simulation (default on)");
  c_hs->add_option("--t-end", hs.t_end, "simulation horizon (default 2000/b)");
  c_hs->add_option("--jobs", hs.jobs, "worker threads")->capture_default_str();
  c_hs->add_option("--out", hs.out, "CSV path (default stdout)");

  ReproduceCmd rp;
  auto* c_rp = app.add_subcommand("reproduce-paper", "rerun the reference experiment and compare to published values");
  c_rp->add_option("--out-dir", rp.out_dir, "output directory")->capture_default_str();
  c_rp->add_option("--f2-gain", rp.f2_gain, "scale of the second feedback (0 removes it)")->capture_default_str();
  c_rp->add_flag("--skip-limit-cycle", rp.skip_limit_cycle, "skip the long informational runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_eq) return eq.run();
    if (*c_st) return st.run();
    if (*c_sim) return sim.run();
    if (*c_osc) return osc.run();
    if (*c_mp) return mp.run();
    if (*c_hs) return hs.run();
    if (*c_rp) return rp.run();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
