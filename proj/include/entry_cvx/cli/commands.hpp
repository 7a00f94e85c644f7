#ifndef ENTRY_CVX_CLI_COMMANDS_HPP
#define ENTRY_CVX_CLI_COMMANDS_HPP

#include "entry_cvx/cli/config.hpp"
#include "entry_cvx/cli/output.hpp"
#include "entry_cvx/cli/studies.hpp"
#include "entry_cvx/planner.hpp"
#include "entry_cvx/socp/problem_io.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>

namespace entry_cvx::cli {

namespace fs = std::filesystem;

inline fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

inline ScpPlanner make_planner(const RunConfig& cfg) {
  return ScpPlanner(cfg.model(), cfg.bounds, cfg.limits, cfg.scp);
}

inline Track entry_track(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  return entry_track(cfg.model(), s.h0, s.theta0, s.phi0, s.V0, s.gamma0, s.psi0);
}

/// Runs the planner and writes its files.  Returns 0 only when the iteration converged.
inline int cmd_plan(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out_dir(cfg);
  const EntryScenario sc = cfg.resolved_scenario();
  ScpPlanner planner = make_planner(cfg);
  const EntryModel& M = planner.model();
  planner.set_logger([&log](const IterationRecord& r) {
    log << "iter " << std::setw(2) << r.k << "  J " << std::setw(14) << r.terms.total() << "  |dx| "
        << std::setw(11) << r.dx_l2 << "  |v| " << std::setw(11) << r.v_l1 << "  socp "
        << socp::to_string(r.solver_status) << " (" << r.solver_iterations << " it)\n";
  });
  log << std::setprecision(6);
  log << "objective " << to_string(cfg.scp.objective) << ", N = " << cfg.scp.N << ", final time "
      << (sc.tf ? format_number(*sc.tf) + " s" : std::string("free")) << "\n";

  const ScpResult res = planner.solve(sc);

  write_text_file((dir / "config.json").string(), dump_json(to_json(cfg)));
  write_text_file((dir / "history.json").string(), dump_json(history_json(res, M, cfg.scp.objective)));
  write_csv_file((dir / "objective.csv").string(), objective_table(res.history));
  if (res.trajectory.x.cols() > 0) {
    write_csv_file((dir / "trajectory.csv").string(), trajectory_table(M, res.trajectory));
    const PlotTables pt = plot_tables(M, res, cfg.limits);
    write_csv_file((dir / "plot_altitude.csv").string(), pt.altitude);
    write_csv_file((dir / "plot_ground_track.csv").string(), pt.ground_track);
    write_csv_file((dir / "plot_bank.csv").string(), pt.bank);
    write_csv_file((dir / "plot_path.csv").string(), pt.path);
  }

  const json fin = final_state_json(M, res.trajectory);
  log << to_string(res.termination) << ": " << res.message << "\n";
  log << "final h " << fin["h_m"].get<double>() / 1000.0 << " km, V " << fin["V_m_s"].get<double>()
      << " m/s, theta " << fin["theta_deg"].get<double>() << " deg, phi " << fin["phi_deg"].get<double>()
      << " deg, s_f " << fin["s_m"].get<double>() / 1000.0 << " km, t_f " << fin["t_s"].get<double>() << " s\n";
  const auto& v = res.validation;
  log << "peak loads (optimized / propagated): heat rate " << v.max_optimized.Qdot << " / " << v.max_propagated.Qdot
      << " W/cm2, dynamic pressure " << v.max_optimized.q << " / " << v.max_propagated.q << " Pa, load "
      << v.max_optimized.a << " / " << v.max_propagated.a << " g0\n";
  log << "re-propagated terminal altitude deviation " << v.altitude_deviation_m << " m\n";
  log << "solver time " << res.solve_seconds << " s, total " << res.total_seconds << " s\n";

  if (res.termination == Termination::Converged) return 0;
  json details = {{"termination", to_string(res.termination)}, {"iterations", res.history.size()}};
  if (res.failed_subproblem) {
    const fs::path dump = dir / "failed_subproblem.txt";
    socp::write_problem_file(dump.string(), *res.failed_subproblem);
    details["subproblem_dump"] = dump.string();
  }
  write_text_file((dir / "error.json").string(), dump_json(error_json(to_string(res.termination), res.message, details)));
  return 1;
}

inline int propagate_steps(const RunConfig& cfg) {
  const auto& p = cfg.propagate;
  if (p.steps > 0) return p.steps;
  switch (p.mode) {
    case IvarMode::Time: return p.compare.steps_time;
    case IvarMode::Energy: return p.compare.steps_energy;
    case IvarMode::Range: return p.compare.steps_range;
  }
  return p.compare.steps_time;
}

inline double propagate_span(const RunConfig& cfg, const Track& x0) {
  const EntryModel M = cfg.model();
  const auto& p = cfg.propagate;
  const IvarMode mode = p.mode;
  std::optional<double> si;
  switch (mode) {
    case IvarMode::Time: si = p.duration_s; break;
    case IvarMode::Energy: si = p.energy_J_kg; break;
    case IvarMode::Range: si = p.range_m; break;
  }
  if (si) return ivar_from_si(M, mode, *si);
  return span_to_altitude(M, mode, x0, p.compare.stop_altitude_m, propagate_steps(cfg), p.bank);
}

/// One open-loop run; writes propagation.csv.
inline int cmd_propagate(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out_dir(cfg);
  const EntryModel M = cfg.model();
  const auto& p = cfg.propagate;
  const Track x0 = entry_track(cfg);
  const double span = propagate_span(cfg, x0);
  const int steps = propagate_steps(cfg);
  const auto pr = propagate_track(M, p.mode, x0, span, steps, p.bank);
  write_csv_file((dir / "propagation.csv").string(), propagation_table(M, p.mode, pr, p.bank, p.output_stride));

  const StateRow r = to_row(M, pr.final_state(), p.bank.at(ivar_to_si(M, p.mode, pr.t.back())));
  log << std::setprecision(10) << to_string(p.mode) << " propagation, span " << ivar_to_si(M, p.mode, span)
      << ", " << steps << " RK4 steps\n";
  log << "final h " << r.h_m << " m, theta " << r.theta_deg << " deg, phi " << r.phi_deg << " deg, V " << r.V_m_s
      << " m/s, gamma " << r.gamma_deg << " deg, psi " << r.psi_deg << " deg, s " << r.s_m << " m, t " << r.t_s
      << " s\n";
  return 0;
}

/// Time-, energy- and range-parameterized runs of the same scenario.
inline int cmd_compare_ivar(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out_dir(cfg);
  const EntryModel M = cfg.model();
  const IvarComparison c = compare_ivar(M, entry_track(cfg), cfg.propagate.bank, cfg.propagate.compare);
  write_csv_file((dir / "ivar_comparison.csv").string(), comparison_table(c));
  write_text_file((dir / "ivar_comparison.json").string(), dump_json(to_json(c)));

  log << std::fixed << std::setprecision(4);
  log << "quantity        initial         time       energy        range\n";
  auto line = [&log](const char* name, double a, double b, double e, double r) {
    log << std::left << std::setw(10) << name << std::right << std::setw(13) << a << std::setw(13) << b
        << std::setw(13) << e << std::setw(13) << r << "\n";
  };
  line("h (m)", c.initial.h_m, c.time.h_m, c.energy.h_m, c.range.h_m);
  line("theta (deg)", c.initial.theta_deg, c.time.theta_deg, c.energy.theta_deg, c.range.theta_deg);
  line("phi (deg)", c.initial.phi_deg, c.time.phi_deg, c.energy.phi_deg, c.range.phi_deg);
  line("V (m/s)", c.initial.V_m_s, c.time.V_m_s, c.energy.V_m_s, c.range.V_m_s);
  line("gamma (deg)", c.initial.gamma_deg, c.time.gamma_deg, c.energy.gamma_deg, c.range.gamma_deg);
  line("psi (deg)", c.initial.psi_deg, c.time.psi_deg, c.energy.psi_deg, c.range.psi_deg);
  line("sigma (deg)", c.initial.sigma_deg, c.time.sigma_deg, c.energy.sigma_deg, c.range.sigma_deg);
  line("s (m)", c.initial.s_m, c.time.s_m, c.energy.s_m, c.range.s_m);
  line("t (s)", c.initial.t_s, c.time.t_s, c.energy.t_s, c.range.t_s);
  log << "altitude gap (time - energy) " << c.altitude_gap_m << " m\n";
  log << "longitude / latitude gap (energy - time) " << c.longitude_gap_m << " / " << c.latitude_gap_m << " m\n";
  log << "range vs time: altitude " << c.range_vs_time_altitude_m << " m, longitude " << c.range_vs_time_longitude_m
      << " m, latitude " << c.range_vs_time_latitude_m << " m\n";
  return 0;
}

/// Writes the first convex subproblem (built on the initial guess) in the socp text format.
inline int cmd_dump_problem(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out_dir(cfg);
  const ScpPlanner planner = make_planner(cfg);
  const EntryScenario sc = cfg.resolved_scenario();
  const SubproblemBuilder sb = planner.builder(sc);
  const Boundary bc = sc.nondimensional(planner.model(), cfg.scp.sigma0);
  const ReferenceTrajectory ref = initial_guess(planner.config(), bc.x0, planner.model());
  const Subproblem sp = sb.build(ref);
  const fs::path path = dir / "problem.txt";
  socp::write_problem_file(path.string(), sp.program);
  log << "wrote " << path.string() << ": " << sp.program.n() << " variables, " << sp.program.p()
      << " equalities, " << sp.program.m() << " cone rows (" << sp.program.cones.orthant << " orthant, "
      << sp.program.cones.soc.size() << " second-order cones)\n";
  return 0;
}

}  // namespace entry_cvx::cli

#endif
