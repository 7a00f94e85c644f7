#ifndef ENTRY_CVX_CLI_CONFIG_HPP
#define ENTRY_CVX_CLI_CONFIG_HPP

#include "entry_cvx/cli/studies.hpp"
#include "entry_cvx/models.hpp"
#include "entry_cvx/planner.hpp"
#include "entry_cvx/transcription.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace entry_cvx::cli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flight time used by the max-altitude and min-velocity presets.
inline constexpr double kPresetFinalTime = 355.0;

/// "auto" fixes the final time for max-altitude/min-velocity and frees it for min-time.
struct FinalTime {
  enum class Kind { Auto, Free, Fixed } kind = Kind::Auto;
  double seconds = 0.0;

  std::optional<double> resolve(Objective o) const {
    switch (kind) {
      case Kind::Auto: return o == Objective::MinTime ? std::nullopt : std::optional<double>(kPresetFinalTime);
      case Kind::Free: return std::nullopt;
      case Kind::Fixed: return seconds;
    }
    return std::nullopt;
  }
};

struct PropagateSettings {
  IvarMode mode = IvarMode::Time;
  BankProfile bank;
  std::optional<double> duration_s;     // time mode span
  std::optional<double> range_m;        // range mode span
  std::optional<double> energy_J_kg;    // energy mode span (change of 1/r - V^2/2, SI)
  int steps = 0;                        // 0 picks the per-mode default from `compare`
  CompareSettings compare;
  int output_stride = 1;
};

struct RunConfig {
  PlanetModel planet;
  VehicleModel vehicle;
  PathLimits limits;
  StateBounds bounds;
  EntryScenario scenario;
  FinalTime final_time;
  ScpConfig scp;
  PropagateSettings propagate;
  std::string out_dir = "out";

  EntryModel model() const { return EntryModel(planet, vehicle); }

  EntryScenario resolved_scenario() const {
    EntryScenario sc = scenario;
    sc.tf = final_time.resolve(scp.objective);
    return sc;
  }

  void validate() const {
    planet.validate();
    vehicle.validate();
    limits.validate();
    bounds.validate();
    scp.validate();
    propagate.bank.validate();
    if (final_time.kind == FinalTime::Kind::Fixed && !(final_time.seconds > 0))
      throw ConfigError("final_time must be positive when fixed");
    if (propagate.steps < 0) throw ConfigError("steps must be >= 0");
    if (propagate.output_stride < 1) throw ConfigError("output_stride must be >= 1");
  }
};

namespace detail {

/// One documented key: how to read it from JSON and write it back.
struct KeySpec {
  const char* name;
  const char* doc;
  std::function<void(RunConfig&, const json&)> read;
  std::function<json(const RunConfig&)> write;
};

template <typename T>
T as(const json& v, const char* key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename Member>
KeySpec number(const char* name, const char* doc, Member member) {
  return {name, doc, [member, name](RunConfig& c, const json& v) { member(c) = as<double>(v, name); },
          [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
KeySpec integer(const char* name, const char* doc, Member member) {
  return {name, doc, [member, name](RunConfig& c, const json& v) { member(c) = as<int>(v, name); },
          [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
KeySpec boolean(const char* name, const char* doc, Member member) {
  return {name, doc, [member, name](RunConfig& c, const json& v) { member(c) = as<bool>(v, name); },
          [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
KeySpec optional_number(const char* name, const char* doc, Member member) {
  return {name, doc,
          [member, name](RunConfig& c, const json& v) {
            if (v.is_null())
              member(c).reset();
            else
              member(c) = as<double>(v, name);
          },
          [member](const RunConfig& c) {
            const auto& o = member(const_cast<RunConfig&>(c));
            return o ? json(*o) : json(nullptr);
          }};
}

// clang-format off
inline const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
    number("planet_radius_m", "reference radius R0", [](RunConfig& c) -> double& { return c.planet.R0; }),
    number("gravity_m_s2", "surface gravity g0", [](RunConfig& c) -> double& { return c.planet.g0; }),
    number("rotation_rate_rad_s", "planet rotation rate", [](RunConfig& c) -> double& { return c.planet.omega_dim; }),
    number("density0_kg_m3", "surface density of the exponential atmosphere", [](RunConfig& c) -> double& { return c.planet.rho0; }),
    number("scale_height_m", "density scale height", [](RunConfig& c) -> double& { return c.planet.h_s; }),
    number("vehicle_mass_kg", "vehicle mass", [](RunConfig& c) -> double& { return c.vehicle.m; }),
    number("reference_area_m2", "aerodynamic reference area", [](RunConfig& c) -> double& { return c.vehicle.S_r; }),
    number("lift_coefficient", "C_L", [](RunConfig& c) -> double& { return c.vehicle.C_L; }),
    number("drag_coefficient", "C_D", [](RunConfig& c) -> double& { return c.vehicle.C_D; }),
    number("heating_coefficient", "k_Q of the stagnation heat-rate model", [](RunConfig& c) -> double& { return c.vehicle.k_Q; }),
    number("nose_radius_m", "nose radius of the heat-rate model", [](RunConfig& c) -> double& { return c.vehicle.R_n; }),
    number("heat_rate_max_W_cm2", "heat-rate limit", [](RunConfig& c) -> double& { return c.limits.Qdot_max; }),
    number("dynamic_pressure_max_Pa", "dynamic-pressure limit", [](RunConfig& c) -> double& { return c.limits.q_max; }),
    number("load_max_g0", "aerodynamic load limit in g0", [](RunConfig& c) -> double& { return c.limits.a_max; }),
    number("altitude_min_m", "state box", [](RunConfig& c) -> double& { return c.bounds.h_min; }),
    number("altitude_max_m", "state box (raised to the entry altitude when raise_ceiling_to_entry)", [](RunConfig& c) -> double& { return c.bounds.h_max; }),
    number("longitude_min_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.theta_min; }),
    number("longitude_max_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.theta_max; }),
    number("latitude_min_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.phi_min; }),
    number("latitude_max_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.phi_max; }),
    number("velocity_min_m_s", "state box", [](RunConfig& c) -> double& { return c.bounds.V_min; }),
    number("velocity_max_m_s", "state box; also sets the relaxed bank-rate bound", [](RunConfig& c) -> double& { return c.bounds.V_max; }),
    number("flight_path_min_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.gamma_min; }),
    number("flight_path_max_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.gamma_max; }),
    number("heading_min_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.psi_min; }),
    number("heading_max_deg", "state box", [](RunConfig& c) -> double& { return c.bounds.psi_max; }),
    number("bank_max_deg", "bank magnitude limit", [](RunConfig& c) -> double& { return c.bounds.sigma_max; }),
    number("bank_rate_max_deg_s", "bank rate limit", [](RunConfig& c) -> double& { return c.bounds.sigma_rate_max; }),
    number("range_min_m", "bounds on the final downrange", [](RunConfig& c) -> double& { return c.bounds.s_min; }),
    number("range_max_m", "bounds on the final downrange", [](RunConfig& c) -> double& { return c.bounds.s_max; }),
    number("entry_altitude_m", "interface altitude", [](RunConfig& c) -> double& { return c.scenario.h0; }),
    number("entry_longitude_deg", "interface longitude", [](RunConfig& c) -> double& { return c.scenario.theta0; }),
    number("entry_latitude_deg", "interface latitude", [](RunConfig& c) -> double& { return c.scenario.phi0; }),
    number("entry_velocity_m_s", "interface speed", [](RunConfig& c) -> double& { return c.scenario.V0; }),
    number("entry_flight_path_deg", "interface flight-path angle", [](RunConfig& c) -> double& { return c.scenario.gamma0; }),
    number("entry_heading_deg", "interface heading", [](RunConfig& c) -> double& { return c.scenario.psi0; }),
    {"entry_bank_deg", "bank angle at the interface (ignored when initial_bank_free)",
     [](RunConfig& c, const json& v) { c.scp.sigma0 = as<double>(v, "entry_bank_deg") * kDegToRad; },
     [](const RunConfig& c) { return json(c.scp.sigma0 * kRadToDeg); }},
    number("target_altitude_m", "final altitude (ignored by max-altitude)", [](RunConfig& c) -> double& { return c.scenario.hf; }),
    number("target_longitude_deg", "final longitude", [](RunConfig& c) -> double& { return c.scenario.thetaf; }),
    number("target_latitude_deg", "final latitude", [](RunConfig& c) -> double& { return c.scenario.phif; }),
    {"final_time", "\"auto\", \"free\" or seconds",
     [](RunConfig& c, const json& v) {
       if (v.is_string()) {
         const std::string s = v.get<std::string>();
         if (s == "auto") c.final_time.kind = FinalTime::Kind::Auto;
         else if (s == "free") c.final_time.kind = FinalTime::Kind::Free;
         else throw ConfigError("final_time must be \"auto\", \"free\" or a number");
       } else {
         c.final_time.kind = FinalTime::Kind::Fixed;
         c.final_time.seconds = as<double>(v, "final_time");
       }
     },
     [](const RunConfig& c) {
       switch (c.final_time.kind) {
         case FinalTime::Kind::Auto: return json("auto");
         case FinalTime::Kind::Free: return json("free");
         case FinalTime::Kind::Fixed: return json(c.final_time.seconds);
       }
       return json("auto");
     }},
    {"objective", "max-altitude, min-velocity or min-time",
     [](RunConfig& c, const json& v) {
       try { c.scp.objective = objective_from_string(as<std::string>(v, "objective")); }
       catch (const std::invalid_argument& e) { throw ConfigError(e.what()); }
     },
     [](const RunConfig& c) { return json(to_string(c.scp.objective)); }},
    integer("nodes", "number of range intervals N (N+1 nodes)", [](RunConfig& c) -> int& { return c.scp.N; }),
    number("weight_objective", "weight on the terminal objective", [](RunConfig& c) -> double& { return c.scp.weights.w_i; }),
    number("weight_virtual_control", "weight on the l1 norm of the virtual control", [](RunConfig& c) -> double& { return c.scp.weights.w_v; }),
    number("weight_trust_region", "weight on the l2 norm of the state trust radii", [](RunConfig& c) -> double& { return c.scp.weights.w_x; }),
    number("weight_range_trust", "weight on the final-range trust radius", [](RunConfig& c) -> double& { return c.scp.weights.w_s; }),
    number("trust_tolerance", "convergence threshold on the trust radii (l2)", [](RunConfig& c) -> double& { return c.scp.delta_tol; }),
    number("virtual_control_tolerance", "convergence threshold on the virtual control (l1)", [](RunConfig& c) -> double& { return c.scp.v_tol; }),
    integer("max_iterations", "outer iteration cap", [](RunConfig& c) -> int& { return c.scp.max_iterations; }),
    number("guess_bank_rate", "constant d(bank)/ds of the initial guess, rad per unit nondimensional range", [](RunConfig& c) -> double& { return c.scp.u_guess; }),
    number("guess_range_m", "final range of the initial guess", [](RunConfig& c) -> double& { return c.scp.s_f_guess; }),
    integer("guess_substeps", "RK4 steps per node interval for the initial guess", [](RunConfig& c) -> int& { return c.scp.guess_substeps; }),
    integer("validation_substeps", "RK4 steps per node interval for re-propagation", [](RunConfig& c) -> int& { return c.scp.validation_substeps; }),
    boolean("path_constraints", "impose linearized heat-rate/pressure/load limits", [](RunConfig& c) -> bool& { return c.scp.transcription.path_constraints; }),
    boolean("box_bounds", "impose the state box at every node", [](RunConfig& c) -> bool& { return c.scp.transcription.box_bounds; }),
    boolean("raise_ceiling_to_entry", "lift the altitude ceiling to the entry altitude", [](RunConfig& c) -> bool& { return c.scp.transcription.raise_ceiling_to_entry; }),
    number("trust_cap", "hard cap on per-node trust radii (<= 0 disables)", [](RunConfig& c) -> double& { return c.scp.transcription.trust_cap; }),
    boolean("initial_bank_free", "leave the initial bank angle free", [](RunConfig& c) -> bool& { return c.scp.transcription.sigma0_free; }),
    number("solver_tolerance", "SOCP residual tolerance", [](RunConfig& c) -> double& { return c.scp.solver.tol; }),
    integer("solver_max_iterations", "SOCP iteration cap", [](RunConfig& c) -> int& { return c.scp.solver.max_iter; }),
    {"propagation_mode", "time, energy or range",
     [](RunConfig& c, const json& v) {
       try { c.propagate.mode = ivar_mode_from_string(as<std::string>(v, "propagation_mode")); }
       catch (const std::invalid_argument& e) { throw ConfigError(e.what()); }
     },
     [](const RunConfig& c) { return json(to_string(c.propagate.mode)); }},
    number("bank_deg", "constant bank angle for open-loop propagation", [](RunConfig& c) -> double& { return c.propagate.bank.constant_deg; }),
    {"bank_table", "[[x, bank_deg], ...] over the mode's independent variable in SI; overrides bank_deg",
     [](RunConfig& c, const json& v) {
       c.propagate.bank.table_deg.clear();
       if (!v.is_array()) throw ConfigError("bank_table must be an array of [x, bank_deg] pairs");
       for (const auto& p : v) {
         if (!p.is_array() || p.size() != 2) throw ConfigError("bank_table must be an array of [x, bank_deg] pairs");
         c.propagate.bank.table_deg.emplace_back(as<double>(p[0], "bank_table"), as<double>(p[1], "bank_table"));
       }
     },
     [](const RunConfig& c) {
       json a = json::array();
       for (const auto& p : c.propagate.bank.table_deg) a.push_back({p.first, p.second});
       return a;
     }},
    optional_number("duration_s", "time-mode span; null stops at stop_altitude_m", [](RunConfig& c) -> std::optional<double>& { return c.propagate.duration_s; }),
    optional_number("range_m", "range-mode span; null stops at stop_altitude_m", [](RunConfig& c) -> std::optional<double>& { return c.propagate.range_m; }),
    optional_number("energy_J_kg", "energy-mode span; null stops at stop_altitude_m", [](RunConfig& c) -> std::optional<double>& { return c.propagate.energy_J_kg; }),
    integer("steps", "RK4 steps of a propagate run (0: per-mode default)", [](RunConfig& c) -> int& { return c.propagate.steps; }),
    integer("output_stride", "write every k-th propagation sample", [](RunConfig& c) -> int& { return c.propagate.output_stride; }),
    number("stop_altitude_m", "altitude that ends the time-based run of compare-ivar", [](RunConfig& c) -> double& { return c.propagate.compare.stop_altitude_m; }),
    integer("steps_time", "RK4 steps, time parameterization", [](RunConfig& c) -> int& { return c.propagate.compare.steps_time; }),
    integer("steps_energy", "RK4 steps, energy parameterization", [](RunConfig& c) -> int& { return c.propagate.compare.steps_energy; }),
    integer("steps_range", "RK4 steps, range parameterization", [](RunConfig& c) -> int& { return c.propagate.compare.steps_range; }),
    {"out_dir", "output directory",
     [](RunConfig& c, const json& v) { c.out_dir = as<std::string>(v, "out_dir"); },
     [](const RunConfig& c) { return json(c.out_dir); }},
  };
  return specs;
}
// clang-format on

}  // namespace detail

/// Applies the keys of a flat JSON object on top of `base`; unknown keys are rejected.
inline RunConfig apply_config(RunConfig base, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::map<std::string, const detail::KeySpec*> index;
  for (const auto& k : detail::key_specs()) index[k.name] = &k;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto f = index.find(it.key());
    if (f == index.end()) throw ConfigError("unknown config key '" + it.key() + "'");
    f->second->read(base, it.value());
  }
  base.validate();
  return base;
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return apply_config(RunConfig{}, j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Every key with its current value.
inline json to_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& k : detail::key_specs()) j[k.name] = k.write(c);
  return j;
}

/// Key names with one-line descriptions, in declaration order.
inline std::vector<std::pair<std::string, std::string>> documented_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : detail::key_specs()) out.emplace_back(k.name, k.doc);
  return out;
}

}  // namespace entry_cvx::cli

#endif
