#ifndef ENTRY_CVX_MODELS_HPP
#define ENTRY_CVX_MODELS_HPP

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace entry_cvx {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PlanetModel {
  double R0 = 3397.2e3;       // m
  double g0 = 3.7114;         // m/s^2
  double omega_dim = 7.0882e-5;  // rad/s
  double rho0 = 0.0158;       // kg/m^3
  double h_s = 9354.5;        // m

  void validate() const {
    if (!(R0 > 0 && g0 > 0 && rho0 > 0 && h_s > 0) || !(omega_dim >= 0))
      throw std::invalid_argument("planet model: R0, g0, rho0, h_s must be positive and omega >= 0");
  }
};

struct Scaling {
  double t_s = 1.0;
  double V_s = 1.0;
  double R0 = 1.0;
};

inline Scaling make_scaling(const PlanetModel& planet) {
  Scaling sc;
  sc.R0 = planet.R0;
  sc.t_s = std::sqrt(planet.R0 / planet.g0);
  sc.V_s = std::sqrt(planet.R0 * planet.g0);
  return sc;
}

struct VehicleModel {
  double m = 2804.0;
  double S_r = 15.9;
  double C_L = 0.36;
  double C_D = 1.45;
  double k_Q = 1.9027e-4;
  double R_n = 6.476;

  void validate() const {
    if (!(m > 0 && S_r > 0 && C_D > 0 && R_n > 0) || !(C_L >= 0))
      throw std::invalid_argument("vehicle model: m, S_r, C_D, R_n must be positive and C_L >= 0");
  }
};

struct PathLimits {
  double Qdot_max = 70.0;  // W/cm^2
  double q_max = 8500.0;   // Pa
  double a_max = 18.0;     // g0

  void validate() const {
    if (!(Qdot_max > 0 && q_max > 0 && a_max > 0))
      throw std::invalid_argument("path limits must be positive");
  }

  Eigen::Vector3d as_vector() const { return {Qdot_max, q_max, a_max}; }
};

// Interface units: meters, m/s, degrees, deg/s.
struct StateBounds {
  double h_min = 0.0;
  double h_max = 120e3;
  double theta_min = -180.0, theta_max = 180.0;
  double phi_min = -180.0, phi_max = 180.0;
  double V_min = 0.0, V_max = 6000.0;
  double gamma_min = -80.0, gamma_max = 80.0;
  double psi_min = -180.0, psi_max = 180.0;
  double sigma_max = 80.0;
  double sigma_rate_max = 10.0;
  double s_min = 700e3, s_max = 1100e3;

  void validate() const {
    auto chk = [](double lo, double hi, const char* what) {
      if (!(lo < hi)) throw std::invalid_argument(std::string("state bounds: lower >= upper for ") + what);
    };
    chk(h_min, h_max, "h");
    chk(theta_min, theta_max, "theta");
    chk(phi_min, phi_max, "phi");
    chk(V_min, V_max, "V");
    chk(gamma_min, gamma_max, "gamma");
    chk(psi_min, psi_max, "psi");
    chk(s_min, s_max, "s");
    if (!(sigma_max > 0 && sigma_rate_max > 0 && V_max > 0))
      throw std::invalid_argument("state bounds: sigma_max, sigma_rate_max, V_max must be positive");
  }
};

/// Planet, vehicle and the derived nondimensional constants in one place.
struct EntryModel {
  PlanetModel planet;
  VehicleModel vehicle;
  Scaling scale;
  double omega = 0.0;  // nondimensional rotation rate
  double k_aero = 0.0;  // R0*S_r/(2m)

  EntryModel() : EntryModel(PlanetModel{}, VehicleModel{}) {}
  EntryModel(const PlanetModel& p, const VehicleModel& v) : planet(p), vehicle(v) {
    planet.validate();
    vehicle.validate();
    scale = make_scaling(planet);
    omega = planet.omega_dim * scale.t_s;
    k_aero = planet.R0 * vehicle.S_r / (2.0 * vehicle.m);
  }

  double density(double r) const {
    return planet.rho0 * std::exp(-planet.R0 * (r - 1.0) / planet.h_s);
  }

  struct Aero {
    double D;
    double L;
    double rho;
  };

  Aero aero(double r, double V) const {
    const double rho = density(r);
    const double k = k_aero * rho * V * V;
    return {k * vehicle.C_D, k * vehicle.C_L, rho};
  }

  double altitude_m(double r) const { return (r - 1.0) * planet.R0; }
  double radius_from_altitude(double h) const { return 1.0 + h / planet.R0; }
};

struct PathValues {
  double Qdot;  // W/cm^2
  double q;     // Pa
  double a;     // g0

  Eigen::Vector3d as_vector() const { return {Qdot, q, a}; }
};

inline PathValues path_values(const EntryModel& M, double r, double V) {
  const auto ad = M.aero(r, V);
  const double v_dim = V * M.scale.V_s;
  PathValues pv;
  // heat rate evaluated in W/m^2 then converted once
  pv.Qdot = M.vehicle.k_Q * std::sqrt(ad.rho / M.vehicle.R_n) * std::pow(v_dim, 3.15) * 1e-4;
  pv.q = 0.5 * ad.rho * v_dim * v_dim;
  pv.a = std::hypot(ad.L, ad.D);
  return pv;
}

struct PathGradients {
  PathValues value;
  Eigen::Vector3d d_r;  // per unit nondimensional radius
  Eigen::Vector3d d_V;  // per unit nondimensional speed
};

// All three loads are products of rho(r) and a power of V, and drho/dr = -(R0/h_s) rho.
inline PathGradients path_gradients(const EntryModel& M, double r, double V) {
  if (!(V > 0)) throw DomainError("path_gradients: speed must be positive");
  PathGradients g;
  g.value = path_values(M, r, V);
  const double k = M.planet.R0 / M.planet.h_s;
  g.d_r = Eigen::Vector3d(-0.5 * k * g.value.Qdot, -k * g.value.q, -k * g.value.a);
  g.d_V = Eigen::Vector3d(3.15 * g.value.Qdot / V, 2.0 * g.value.q / V, 2.0 * g.value.a / V);
  return g;
}

}  // namespace entry_cvx

#endif
