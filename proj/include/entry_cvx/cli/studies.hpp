#ifndef ENTRY_CVX_CLI_STUDIES_HPP
#define ENTRY_CVX_CLI_STUDIES_HPP

#include "entry_cvx/dynamics.hpp"
#include "entry_cvx/models.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace entry_cvx::cli {

/// Independent variable of an open-loop propagation.
enum class IvarMode { Time, Energy, Range };

inline const char* to_string(IvarMode m) {
  switch (m) {
    case IvarMode::Time: return "time";
    case IvarMode::Energy: return "energy";
    case IvarMode::Range: return "range";
  }
  return "?";
}

inline IvarMode ivar_mode_from_string(const std::string& s) {
  if (s == "time") return IvarMode::Time;
  if (s == "energy") return IvarMode::Energy;
  if (s == "range") return IvarMode::Range;
  throw std::invalid_argument("unknown propagation mode '" + s + "' (expected time, energy or range)");
}

/// Bank angle as a constant or a piecewise-linear table over the independent
/// variable in SI units (s, J/kg or m).  Held constant outside the table.
struct BankProfile {
  double constant_deg = -50.0;
  std::vector<std::pair<double, double>> table_deg;

  double at(double x_si) const {
    if (table_deg.empty()) return constant_deg * kDegToRad;
    if (x_si <= table_deg.front().first) return table_deg.front().second * kDegToRad;
    if (x_si >= table_deg.back().first) return table_deg.back().second * kDegToRad;
    auto it = std::upper_bound(table_deg.begin(), table_deg.end(), x_si,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = (x_si - a.first) / (b.first - a.first);
    return (a.second + w * (b.second - a.second)) * kDegToRad;
  }

  void validate() const {
    for (std::size_t i = 1; i < table_deg.size(); ++i)
      if (!(table_deg[i].first > table_deg[i - 1].first))
        throw std::invalid_argument("bank table: abscissae must be strictly increasing");
  }
};

/// Entry states plus range and time, all nondimensional: [r theta phi V gamma psi s tau].
using Track = Vec8;
inline constexpr int kRange = 6;
inline constexpr int kTime = 7;

/// Converts a nondimensional independent-variable value to SI.
inline double ivar_to_si(const EntryModel& M, IvarMode mode, double v) {
  switch (mode) {
    case IvarMode::Time: return v * M.scale.t_s;
    case IvarMode::Energy: return v * M.scale.V_s * M.scale.V_s;
    case IvarMode::Range: return v * M.planet.R0;
  }
  return v;
}

inline double ivar_from_si(const EntryModel& M, IvarMode mode, double v) {
  switch (mode) {
    case IvarMode::Time: return v / M.scale.t_s;
    case IvarMode::Energy: return v / (M.scale.V_s * M.scale.V_s);
    case IvarMode::Range: return v / M.planet.R0;
  }
  return v;
}

inline double ivar_value(IvarMode mode, const Track& x) {
  switch (mode) {
    case IvarMode::Time: return x(kTime);
    case IvarMode::Energy: return specific_energy(x(ix::r), x(ix::V));
    case IvarMode::Range: return x(kRange);
  }
  return 0.0;
}

/// dx/d(independent variable) for the chosen parameterization.  The energy form
/// uses de/dtau = D V, so it omits the rotation contribution to the energy rate.
inline Track track_rhs(const EntryModel& M, IvarMode mode, const Track& x, double sigma) {
  Track f;
  switch (mode) {
    case IvarMode::Time: {
      f.head<7>() = rhs_time(M, x.head<6>(), sigma);
      f(kTime) = 1.0;
      break;
    }
    case IvarMode::Energy: {
      const auto ad = M.aero(x(ix::r), x(ix::V));
      const double dv = ad.D * x(ix::V);
      if (!(dv > 1e-14)) throw DomainError("energy dynamics: drag power below 1e-14 (atmosphere too thin)");
      f.head<7>() = rhs_time(M, x.head<6>(), sigma) / dv;
      f(kTime) = 1.0 / dv;
      break;
    }
    case IvarMode::Range: {
      f.head<6>() = rhs_range(M, x.head<6>(), sigma);
      f(kRange) = 1.0;
      f(kTime) = 1.0 / (x(ix::V) * std::cos(x(ix::gamma)));
      break;
    }
  }
  return f;
}

/// Propagates from x0 until the independent variable has advanced by `span`
/// (nondimensional), using `steps` RK4 steps.
inline PropagationResult<Track> propagate_track(const EntryModel& M, IvarMode mode, const Track& x0, double span,
                                                int steps, const BankProfile& bank) {
  const double a = ivar_value(mode, x0);
  auto f = [&](double iv, const Track& x) { return track_rhs(M, mode, x, bank.at(ivar_to_si(M, mode, iv))); };
  if (span == 0.0) {
    PropagationResult<Track> out;
    out.t.push_back(a);
    out.x.push_back(x0);
    return out;
  }
  return propagate<Track>(f, x0, a, a + span, steps);
}

/// Span of the independent variable at which the propagated altitude reaches
/// `stop_altitude_m`, found by bracketing and bisection with `steps` fixed.
inline double span_to_altitude(const EntryModel& M, IvarMode mode, const Track& x0, double stop_altitude_m,
                               int steps, const BankProfile& bank) {
  const double r_stop = M.radius_from_altitude(stop_altitude_m);
  if (!(x0(ix::r) > r_stop)) throw std::invalid_argument("stop altitude must lie below the initial altitude");
  auto below = [&](double span) {
    try {
      return propagate_track(M, mode, x0, span, steps, bank).final_state()(ix::r) <= r_stop;
    } catch (const DomainError&) {
      return true;  // the run left the domain before the span ended: overshoot
    }
  };
  double lo = 0.0, hi = 0.05;
  int grow = 0;
  while (!below(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 40) throw std::runtime_error("stop altitude is never reached");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Initial track from interface conditions in SI and degrees.
inline Track entry_track(const EntryModel& M, double h_m, double theta_deg, double phi_deg, double V_m_s,
                         double gamma_deg, double psi_deg) {
  Track x;
  x << M.radius_from_altitude(h_m), theta_deg * kDegToRad, phi_deg * kDegToRad, V_m_s / M.scale.V_s,
      gamma_deg * kDegToRad, psi_deg * kDegToRad, 0.0, 0.0;
  return x;
}

/// One state in presentation units.
struct StateRow {
  double h_m = 0, theta_deg = 0, phi_deg = 0, V_m_s = 0, gamma_deg = 0, psi_deg = 0, sigma_deg = 0, s_m = 0, t_s = 0;
};

inline StateRow to_row(const EntryModel& M, const Track& x, double sigma_rad) {
  StateRow r;
  r.h_m = M.altitude_m(x(ix::r));
  r.theta_deg = x(ix::theta) * kRadToDeg;
  r.phi_deg = x(ix::phi) * kRadToDeg;
  r.V_m_s = x(ix::V) * M.scale.V_s;
  r.gamma_deg = x(ix::gamma) * kRadToDeg;
  r.psi_deg = x(ix::psi) * kRadToDeg;
  r.sigma_deg = sigma_rad * kRadToDeg;
  r.s_m = x(kRange) * M.planet.R0;
  r.t_s = x(kTime) * M.scale.t_s;
  return r;
}

struct IvarComparison {
  StateRow initial, time, energy, range;
  double time_span_s = 0;
  double altitude_gap_m = 0;   // time minus energy final altitude
  double longitude_gap_m = 0;  // (energy - time) final longitude, arc length on R0
  double latitude_gap_m = 0;   // (energy - time) final latitude, arc length on R0
  double range_vs_time_altitude_m = 0;
  double range_vs_time_longitude_m = 0;
  double range_vs_time_latitude_m = 0;
  int steps_time = 0, steps_energy = 0, steps_range = 0;
};

struct CompareSettings {
  double stop_altitude_m = 16232.04;
  int steps_time = 2000;
  int steps_energy = 400000;
  int steps_range = 2000;
};

/// Time-, energy- and range-parameterized runs of one open-loop scenario.  The time
/// run length is chosen so that it ends at `stop_altitude_m`; the energy run then
/// covers the same energy interval and the range run the same downrange.
inline IvarComparison compare_ivar(const EntryModel& M, const Track& x0, const BankProfile& bank,
                                   const CompareSettings& cs) {
  IvarComparison c;
  c.steps_time = cs.steps_time;
  c.steps_energy = cs.steps_energy;
  c.steps_range = cs.steps_range;
  const double T = span_to_altitude(M, IvarMode::Time, x0, cs.stop_altitude_m, cs.steps_time, bank);
  const Track xt = propagate_track(M, IvarMode::Time, x0, T, cs.steps_time, bank).final_state();
  const double de = specific_energy(xt(ix::r), xt(ix::V)) - specific_energy(x0(ix::r), x0(ix::V));
  const Track xe = propagate_track(M, IvarMode::Energy, x0, de, cs.steps_energy, bank).final_state();
  const Track xr = propagate_track(M, IvarMode::Range, x0, xt(kRange), cs.steps_range, bank).final_state();

  c.time_span_s = T * M.scale.t_s;
  c.initial = to_row(M, x0, bank.at(0.0));
  c.time = to_row(M, xt, bank.at(c.time_span_s));
  c.energy = to_row(M, xe, bank.at(ivar_to_si(M, IvarMode::Energy, specific_energy(xe(ix::r), xe(ix::V)))));
  c.range = to_row(M, xr, bank.at(xr(kRange) * M.planet.R0));
  c.altitude_gap_m = c.time.h_m - c.energy.h_m;
  c.longitude_gap_m = (xe(ix::theta) - xt(ix::theta)) * M.planet.R0;
  c.latitude_gap_m = (xe(ix::phi) - xt(ix::phi)) * M.planet.R0;
  c.range_vs_time_altitude_m = c.range.h_m - c.time.h_m;
  c.range_vs_time_longitude_m = (xr(ix::theta) - xt(ix::theta)) * M.planet.R0;
  c.range_vs_time_latitude_m = (xr(ix::phi) - xt(ix::phi)) * M.planet.R0;
  return c;
}

}  // namespace entry_cvx::cli

#endif
