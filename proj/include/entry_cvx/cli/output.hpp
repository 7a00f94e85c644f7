#ifndef ENTRY_CVX_CLI_OUTPUT_HPP
#define ENTRY_CVX_CLI_OUTPUT_HPP

#include "entry_cvx/cli/studies.hpp"
#include "entry_cvx/planner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace entry_cvx::cli {

using nlohmann::json;

/// Numeric table with a named header; every cell is written with 17 significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::out_of_range("csv: no column '" + name + "'");
  }
  double at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw std::logic_error("csv: row width differs from header");
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("csv: bad number '" + cell + "' on line " + std::to_string(lineno));
      }
      if (used != cell.size()) throw std::runtime_error("csv: bad number '" + cell + "' on line " + std::to_string(lineno));
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw std::runtime_error("csv: wrong column count on line " + std::to_string(lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  write_text_file(path, os.str());
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Trajectory

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> c = {
      "node",          "S",          "s_m",          "t_s",        "h_m",      "theta_deg",
      "phi_deg",       "V_m_s",      "gamma_deg",    "psi_deg",    "sigma_deg", "u_deg_per_km",
      "sigma_rate_deg_s", "heat_rate_W_cm2", "dynamic_pressure_Pa", "load_g0"};
  return c;
}

/// Per-node states, controls and path loads of a range-discretized trajectory.
inline CsvTable trajectory_table(const EntryModel& M, const ReferenceTrajectory& ref) {
  CsvTable t;
  t.header = trajectory_columns();
  const int N = ref.N();
  const double km_per_unit = M.planet.R0 / 1000.0;
  for (int k = 0; k <= N; ++k) {
    const auto x = ref.x.col(k);
    const double S = static_cast<double>(k) / N;
    const PathValues pv = path_values(M, x(ix::r), x(ix::V));
    const double ds_dtau = x(ix::V) * std::cos(x(ix::gamma));
    t.rows.push_back({static_cast<double>(k), S, S * ref.s_f * M.planet.R0, x(ix::tau) * M.scale.t_s,
                      M.altitude_m(x(ix::r)), x(ix::theta) * kRadToDeg, x(ix::phi) * kRadToDeg,
                      x(ix::V) * M.scale.V_s, x(ix::gamma) * kRadToDeg, x(ix::psi) * kRadToDeg,
                      x(ix::sigma) * kRadToDeg, ref.u(k) * kRadToDeg / km_per_unit,
                      ref.u(k) * ds_dtau * kRadToDeg / M.scale.t_s, pv.Qdot, pv.q, pv.a});
  }
  return t;
}

/// Inverse of trajectory_table.
inline ReferenceTrajectory trajectory_from_table(const EntryModel& M, const CsvTable& t) {
  if (t.header != trajectory_columns()) throw std::runtime_error("trajectory csv: unexpected header");
  const int n = static_cast<int>(t.rows.size());
  if (n < 3) throw std::runtime_error("trajectory csv: needs at least 3 nodes");
  ReferenceTrajectory ref;
  ref.x.resize(8, n);
  ref.u.resize(n);
  const double km_per_unit = M.planet.R0 / 1000.0;
  for (int k = 0; k < n; ++k) {
    ref.x(ix::r, k) = M.radius_from_altitude(t.at(k, "h_m"));
    ref.x(ix::theta, k) = t.at(k, "theta_deg") * kDegToRad;
    ref.x(ix::phi, k) = t.at(k, "phi_deg") * kDegToRad;
    ref.x(ix::V, k) = t.at(k, "V_m_s") / M.scale.V_s;
    ref.x(ix::gamma, k) = t.at(k, "gamma_deg") * kDegToRad;
    ref.x(ix::psi, k) = t.at(k, "psi_deg") * kDegToRad;
    ref.x(ix::sigma, k) = t.at(k, "sigma_deg") * kDegToRad;
    ref.x(ix::tau, k) = t.at(k, "t_s") / M.scale.t_s;
    ref.u(k) = t.at(k, "u_deg_per_km") * kDegToRad * km_per_unit;
  }
  ref.s_f = t.at(n - 1, "s_m") / M.planet.R0;
  return ref;
}

// ---------------------------------------------------------------------------
// Iteration history and objective decomposition

inline json to_json(const ObjectiveTerms& t) {
  return {{"objective", t.wJ}, {"virtual_control", t.wv}, {"trust_region", t.wx}, {"range_trust", t.ws},
          {"total", t.total()}};
}

inline ObjectiveTerms terms_from_json(const json& j) {
  ObjectiveTerms t;
  t.wJ = j.at("objective").get<double>();
  t.wv = j.at("virtual_control").get<double>();
  t.wx = j.at("trust_region").get<double>();
  t.ws = j.at("range_trust").get<double>();
  return t;
}

/// Wall-clock time is left out so that identical runs give identical files.
inline json to_json(const IterationRecord& r, const EntryModel& M) {
  return {{"iteration", r.k},
          {"terms", to_json(r.terms)},
          {"trust_l2", r.dx_l2},
          {"virtual_control_l1", r.v_l1},
          {"final_range_m", r.s_f * M.planet.R0},
          {"solver_status", socp::to_string(r.solver_status)},
          {"solver_iterations", r.solver_iterations},
          {"objective_increased", r.objective_increased}};
}

inline socp::Status status_from_string(const std::string& s) {
  for (auto st : {socp::Status::Optimal, socp::Status::PrimalInfeasible, socp::Status::DualInfeasible,
                  socp::Status::MaxIterations, socp::Status::NumericalFailure})
    if (s == socp::to_string(st)) return st;
  throw std::runtime_error("unknown solver status '" + s + "'");
}

inline IterationRecord iteration_from_json(const json& j, const EntryModel& M) {
  IterationRecord r;
  r.k = j.at("iteration").get<int>();
  r.terms = terms_from_json(j.at("terms"));
  r.dx_l2 = j.at("trust_l2").get<double>();
  r.v_l1 = j.at("virtual_control_l1").get<double>();
  r.s_f = j.at("final_range_m").get<double>() / M.planet.R0;
  r.solver_status = status_from_string(j.at("solver_status").get<std::string>());
  r.solver_iterations = j.at("solver_iterations").get<int>();
  r.objective_increased = j.at("objective_increased").get<bool>();
  return r;
}

inline json path_json(const PathValues& p) {
  return {{"heat_rate_W_cm2", p.Qdot}, {"dynamic_pressure_Pa", p.q}, {"load_g0", p.a}};
}

inline json final_state_json(const EntryModel& M, const ReferenceTrajectory& ref) {
  const auto x = ref.x.col(ref.N());
  return {{"h_m", M.altitude_m(x(ix::r))},         {"theta_deg", x(ix::theta) * kRadToDeg},
          {"phi_deg", x(ix::phi) * kRadToDeg},     {"V_m_s", x(ix::V) * M.scale.V_s},
          {"gamma_deg", x(ix::gamma) * kRadToDeg}, {"psi_deg", x(ix::psi) * kRadToDeg},
          {"sigma_deg", x(ix::sigma) * kRadToDeg}, {"s_m", ref.s_f * M.planet.R0},
          {"t_s", x(ix::tau) * M.scale.t_s}};
}

inline json history_json(const ScpResult& res, const EntryModel& M, Objective objective) {
  json iters = json::array();
  for (const auto& r : res.history) iters.push_back(to_json(r, M));
  json summary = {{"objective", to_string(objective)},
                  {"termination", to_string(res.termination)},
                  {"message", res.message},
                  {"iterations", static_cast<int>(res.history.size())},
                  {"final_terms", to_json(res.final_terms)}};
  if (res.trajectory.x.cols() > 0) summary["final_state"] = final_state_json(M, res.trajectory);
  const auto& v = res.validation;
  summary["validation"] = {{"altitude_deviation_m", v.altitude_deviation_m},
                           {"max_node_error", v.max_node_error},
                           {"max_defect_rate", v.max_defect_rate},
                           {"max_optimized", path_json(v.max_optimized)},
                           {"max_propagated", path_json(v.max_propagated)}};
  return {{"summary", summary}, {"history", iters}};
}

inline std::vector<IterationRecord> history_from_json(const json& j, const EntryModel& M) {
  std::vector<IterationRecord> out;
  for (const auto& it : j.at("history")) out.push_back(iteration_from_json(it, M));
  return out;
}

inline CsvTable objective_table(const std::vector<IterationRecord>& hist) {
  CsvTable t;
  t.header = {"iteration", "objective", "virtual_control", "trust_region", "range_trust", "total"};
  for (const auto& r : hist)
    t.rows.push_back({static_cast<double>(r.k), r.terms.wJ, r.terms.wv, r.terms.wx, r.terms.ws, r.terms.total()});
  return t;
}

// ---------------------------------------------------------------------------
// Plot series: optimized nodes next to the re-propagated states at the same nodes.

struct PlotTables {
  CsvTable altitude, ground_track, bank, path;
};

inline PlotTables plot_tables(const EntryModel& M, const ScpResult& res, const PathLimits& limits) {
  const ReferenceTrajectory& ref = res.trajectory;
  const Mat8X& P = res.validation.propagated;
  const bool have_prop = P.cols() == ref.x.cols();
  const int N = ref.N();
  PlotTables pt;
  pt.altitude.header = {"t_s", "s_km", "V_m_s", "h_km", "h_km_propagated", "V_m_s_propagated"};
  pt.ground_track.header = {"theta_deg", "phi_deg", "theta_deg_propagated", "phi_deg_propagated"};
  pt.bank.header = {"t_s", "s_km", "V_m_s", "sigma_deg", "sigma_rate_deg_s"};
  pt.path.header = {"t_s",
                    "heat_rate_W_cm2",
                    "dynamic_pressure_Pa",
                    "load_g0",
                    "heat_rate_W_cm2_propagated",
                    "dynamic_pressure_Pa_propagated",
                    "load_g0_propagated",
                    "heat_rate_max",
                    "dynamic_pressure_max",
                    "load_max"};
  const double nan = std::nan("");
  for (int k = 0; k <= N; ++k) {
    const auto x = ref.x.col(k);
    const Vec8 p = have_prop ? Vec8(P.col(k)) : Vec8::Constant(nan);
    const double t = x(ix::tau) * M.scale.t_s;
    const double s_km = static_cast<double>(k) / N * ref.s_f * M.planet.R0 / 1000.0;
    const double V = x(ix::V) * M.scale.V_s;
    const PathValues a = path_values(M, x(ix::r), x(ix::V));
    const PathValues b = have_prop ? path_values(M, p(ix::r), p(ix::V)) : PathValues{nan, nan, nan};
    pt.altitude.rows.push_back({t, s_km, V, M.altitude_m(x(ix::r)) / 1000.0, M.altitude_m(p(ix::r)) / 1000.0,
                                p(ix::V) * M.scale.V_s});
    pt.ground_track.rows.push_back(
        {x(ix::theta) * kRadToDeg, x(ix::phi) * kRadToDeg, p(ix::theta) * kRadToDeg, p(ix::phi) * kRadToDeg});
    pt.bank.rows.push_back({t, s_km, V, x(ix::sigma) * kRadToDeg,
                            ref.u(k) * x(ix::V) * std::cos(x(ix::gamma)) * kRadToDeg / M.scale.t_s});
    pt.path.rows.push_back({t, a.Qdot, a.q, a.a, b.Qdot, b.q, b.a, limits.Qdot_max, limits.q_max, limits.a_max});
  }
  return pt;
}

// ---------------------------------------------------------------------------
// Open-loop propagation

inline const std::vector<std::string>& propagation_columns() {
  static const std::vector<std::string> c = {
      "ivar",    "h_m",       "theta_deg", "phi_deg",         "V_m_s",
      "gamma_deg", "psi_deg", "s_m",       "t_s",             "sigma_deg",
      "heat_rate_W_cm2", "dynamic_pressure_Pa", "load_g0"};
  return c;
}

/// One row per sample; `ivar` is the independent variable in SI (s, J/kg or m).
inline CsvTable propagation_table(const EntryModel& M, IvarMode mode, const PropagationResult<Track>& pr,
                                  const BankProfile& bank, int stride = 1) {
  CsvTable t;
  t.header = propagation_columns();
  const std::size_t n = pr.x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride != 0 && i + 1 != n) continue;
    const Track& x = pr.x[i];
    const double iv = ivar_to_si(M, mode, pr.t[i]);
    const StateRow r = to_row(M, x, bank.at(iv));
    const PathValues pv = path_values(M, x(ix::r), x(ix::V));
    t.rows.push_back({iv, r.h_m, r.theta_deg, r.phi_deg, r.V_m_s, r.gamma_deg, r.psi_deg, r.s_m, r.t_s,
                      r.sigma_deg, pv.Qdot, pv.q, pv.a});
  }
  return t;
}

inline Track track_from_row(const EntryModel& M, const CsvTable& t, std::size_t row) {
  Track x;
  x << M.radius_from_altitude(t.at(row, "h_m")), t.at(row, "theta_deg") * kDegToRad,
      t.at(row, "phi_deg") * kDegToRad, t.at(row, "V_m_s") / M.scale.V_s, t.at(row, "gamma_deg") * kDegToRad,
      t.at(row, "psi_deg") * kDegToRad, t.at(row, "s_m") / M.planet.R0, t.at(row, "t_s") / M.scale.t_s;
  return x;
}

// ---------------------------------------------------------------------------
// Independent-variable comparison

inline json to_json(const StateRow& r) {
  return {{"h_m", r.h_m},         {"theta_deg", r.theta_deg}, {"phi_deg", r.phi_deg},
          {"V_m_s", r.V_m_s},     {"gamma_deg", r.gamma_deg}, {"psi_deg", r.psi_deg},
          {"sigma_deg", r.sigma_deg}, {"s_m", r.s_m},         {"t_s", r.t_s}};
}

inline StateRow state_row_from_json(const json& j) {
  StateRow r;
  r.h_m = j.at("h_m").get<double>();
  r.theta_deg = j.at("theta_deg").get<double>();
  r.phi_deg = j.at("phi_deg").get<double>();
  r.V_m_s = j.at("V_m_s").get<double>();
  r.gamma_deg = j.at("gamma_deg").get<double>();
  r.psi_deg = j.at("psi_deg").get<double>();
  r.sigma_deg = j.at("sigma_deg").get<double>();
  r.s_m = j.at("s_m").get<double>();
  r.t_s = j.at("t_s").get<double>();
  return r;
}

inline json to_json(const IvarComparison& c) {
  return {{"initial", to_json(c.initial)},
          {"time", to_json(c.time)},
          {"energy", to_json(c.energy)},
          {"range", to_json(c.range)},
          {"time_span_s", c.time_span_s},
          {"altitude_gap_m", c.altitude_gap_m},
          {"longitude_gap_m", c.longitude_gap_m},
          {"latitude_gap_m", c.latitude_gap_m},
          {"range_vs_time_altitude_m", c.range_vs_time_altitude_m},
          {"range_vs_time_longitude_m", c.range_vs_time_longitude_m},
          {"range_vs_time_latitude_m", c.range_vs_time_latitude_m},
          {"steps", {{"time", c.steps_time}, {"energy", c.steps_energy}, {"range", c.steps_range}}}};
}

inline IvarComparison comparison_from_json(const json& j) {
  IvarComparison c;
  c.initial = state_row_from_json(j.at("initial"));
  c.time = state_row_from_json(j.at("time"));
  c.energy = state_row_from_json(j.at("energy"));
  c.range = state_row_from_json(j.at("range"));
  c.time_span_s = j.at("time_span_s").get<double>();
  c.altitude_gap_m = j.at("altitude_gap_m").get<double>();
  c.longitude_gap_m = j.at("longitude_gap_m").get<double>();
  c.latitude_gap_m = j.at("latitude_gap_m").get<double>();
  c.range_vs_time_altitude_m = j.at("range_vs_time_altitude_m").get<double>();
  c.range_vs_time_longitude_m = j.at("range_vs_time_longitude_m").get<double>();
  c.range_vs_time_latitude_m = j.at("range_vs_time_latitude_m").get<double>();
  c.steps_time = j.at("steps").at("time").get<int>();
  c.steps_energy = j.at("steps").at("energy").get<int>();
  c.steps_range = j.at("steps").at("range").get<int>();
  return c;
}

/// Side-by-side final states: one row per case (0 initial, 1 time, 2 energy, 3 range).
inline CsvTable comparison_table(const IvarComparison& c) {
  CsvTable t;
  t.header = {"case", "h_m", "theta_deg", "phi_deg", "V_m_s", "gamma_deg", "psi_deg", "sigma_deg", "s_m", "t_s"};
  int i = 0;
  for (const StateRow* r : {&c.initial, &c.time, &c.energy, &c.range})
    t.rows.push_back({static_cast<double>(i++), r->h_m, r->theta_deg, r->phi_deg, r->V_m_s, r->gamma_deg,
                      r->psi_deg, r->sigma_deg, r->s_m, r->t_s});
  return t;
}

// ---------------------------------------------------------------------------

inline json error_json(const std::string& kind, const std::string& message, json details = json::object()) {
  return {{"error", kind}, {"message", message}, {"details", std::move(details)}};
}

}  // namespace entry_cvx::cli

#endif
