#ifndef ENTRY_CVX_DYNAMICS_HPP
#define ENTRY_CVX_DYNAMICS_HPP

#include "entry_cvx/models.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace entry_cvx {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;  // 6 entry states plus range s
using Vec8 = Eigen::Matrix<double, 8, 1>;  // 6 entry states plus bank angle and time
using Mat8 = Eigen::Matrix<double, 8, 8>;

namespace ix {
inline constexpr int r = 0;
inline constexpr int theta = 1;
inline constexpr int phi = 2;
inline constexpr int V = 3;
inline constexpr int gamma = 4;
inline constexpr int psi = 5;
inline constexpr int sigma = 6;
inline constexpr int tau = 7;
inline constexpr int s = 6;  // range slot in the 7-vector used by time/energy propagation
}  // namespace ix

namespace detail {

inline void check_domain(double r, double phi, double V, double gamma) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(r > 0)) throw DomainError("entry dynamics: radius must be positive");
  if (!(V > 0)) throw DomainError("entry dynamics: speed must be positive");
  if (std::abs(std::abs(gamma) - half_pi) < 1e-9 || std::abs(gamma) > half_pi)
    throw DomainError("entry dynamics: flight-path angle at +-90 deg");
  if (std::abs(std::abs(phi) - half_pi) < 1e-9)
    throw DomainError("entry dynamics: latitude at a pole");
}

}  // namespace detail

/// Rotation-dependent parts of dV/ds, dgamma/ds, dpsi/ds (zero elsewhere).
template <typename Derived>
Vec6 rotation_terms(const EntryModel& M, const Eigen::MatrixBase<Derived>& x) {
  const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi);
  const double W = M.omega;
  const double cg = std::cos(g), tg = std::tan(g);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double cs = std::cos(psi), ss = std::sin(psi);
  Vec6 f = Vec6::Zero();
  f(ix::V) = W * W * r * cp * (cp * tg - sp * cs) / V;
  f(ix::gamma) = 2.0 * W * cp * ss / (V * cg) + r * W * W * cp * (cp + cs * sp * tg) / (V * V);
  f(ix::psi) = 2.0 * W * (sp - cp * tg * cs) / (V * cg) + W * W * r * sp * cp * ss / (V * V * cg * cg);
  return f;
}

template <typename Derived>
Vec6 rhs_range_rotation_free(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double sigma) {
  const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi);
  detail::check_domain(r, phi, V, g);
  const auto ad = M.aero(r, V);
  const double cg = std::cos(g), tg = std::tan(g);
  Vec6 f;
  f(ix::r) = tg;
  f(ix::theta) = std::sin(psi) / (r * std::cos(phi));
  f(ix::phi) = std::cos(psi) / r;
  f(ix::V) = -ad.D / (V * cg) - tg / (r * r * V);
  f(ix::gamma) = ad.L * std::cos(sigma) / (V * V * cg) - 1.0 / (r * r * V * V) + 1.0 / r;
  f(ix::psi) = ad.L * std::sin(sigma) / (V * V * cg * cg) + std::sin(psi) * std::tan(phi) / r;
  return f;
}

/// d(entry state)/ds with s the nondimensional downrange; rotation included.
template <typename Derived>
Vec6 rhs_range(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double sigma) {
  return rhs_range_rotation_free(M, x, sigma) + rotation_terms(M, x);
}

/// d(entry state, s)/dtau in the usual time-domain form.
template <typename Derived>
Vec7 rhs_time(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double sigma) {
  const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi);
  detail::check_domain(r, phi, V, g);
  const auto ad = M.aero(r, V);
  const double W = M.omega;
  const double cg = std::cos(g), sg = std::sin(g);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double cs = std::cos(psi), ss = std::sin(psi);
  Vec7 f;
  f(ix::r) = V * sg;
  f(ix::theta) = V * cg * ss / (r * cp);
  f(ix::phi) = V * cg * cs / r;
  f(ix::V) = -ad.D - sg / (r * r) + W * W * r * cp * (sg * cp - cg * sp * cs);
  f(ix::gamma) = (ad.L * std::cos(sigma) + (V * V - 1.0 / r) * cg / r + 2.0 * W * V * cp * ss +
                  W * W * r * cp * (cg * cp + sg * cs * sp)) /
                 V;
  f(ix::psi) = (ad.L * std::sin(sigma) / cg + V * V * cg * ss * std::tan(phi) / r -
                2.0 * W * V * (std::tan(g) * cs * cp - sp) + W * W * r * ss * sp * cp / cg) /
               V;
  f(ix::s) = V * cg;
  return f;
}

/// Energy-parameterized dynamics using de/dtau = D V, i.e. ignoring the rotation
/// contribution to the energy rate.
template <typename Derived>
Vec7 rhs_energy(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double sigma) {
  const double V = x(ix::V);
  const auto ad = M.aero(x(ix::r), V);
  const double dv = ad.D * V;
  if (!(dv > 1e-14)) throw DomainError("energy dynamics: drag power below 1e-14 (atmosphere too thin)");
  return rhs_time(M, x, sigma) / dv;
}

inline double specific_energy(double r, double V) { return 1.0 / r - 0.5 * V * V; }

/// de/dtau including rotation, obtained from the time-domain right-hand side.
template <typename Derived>
double energy_rate(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double sigma) {
  const Vec7 f = rhs_time(M, x, sigma);
  const double r = x(ix::r), V = x(ix::V);
  return -f(ix::r) / (r * r) - V * f(ix::V);
}

/// Rotation-free part of the augmented range dynamics: entry rows, zero bank row,
/// and dtau/ds = 1/(V cos gamma).
template <typename Derived>
Vec8 f_augmented(const EntryModel& M, const Eigen::MatrixBase<Derived>& x) {
  Vec8 f;
  f.head<6>() = rhs_range_rotation_free(M, x.template head<6>(), x(ix::sigma));
  f(ix::sigma) = 0.0;
  f(ix::tau) = 1.0 / (x(ix::V) * std::cos(x(ix::gamma)));
  return f;
}

template <typename Derived>
Vec8 f_rotation_augmented(const EntryModel& M, const Eigen::MatrixBase<Derived>& x) {
  Vec8 f = Vec8::Zero();
  f.head<6>() = rotation_terms(M, x.template head<6>());
  return f;
}

inline Vec8 bank_selector() {
  Vec8 b = Vec8::Zero();
  b(ix::sigma) = 1.0;
  return b;
}

/// dx/dS on the normalized range S in [0,1].
template <typename Derived>
Vec8 rhs_augmented(const EntryModel& M, const Eigen::MatrixBase<Derived>& x, double u, double s_f) {
  return s_f * (f_augmented(M, x) + bank_selector() * u + f_rotation_augmented(M, x));
}

template <typename Vec>
struct PropagationResult {
  std::vector<double> t;
  std::vector<Vec> x;

  const Vec& final_state() const { return x.back(); }

  bool independent_variable_increasing() const {
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) return false;
    return true;
  }
};

/// Classical fixed-step RK4 of dx/dt = f(t, x) on [a, b].
template <typename Vec, typename F>
PropagationResult<Vec> propagate(F&& f, const Vec& x0, double a, double b, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("propagate: n_steps must be >= 1");
  PropagationResult<Vec> out;
  out.t.reserve(n_steps + 1);
  out.x.reserve(n_steps + 1);
  const double h = (b - a) / n_steps;
  Vec x = x0;
  out.t.push_back(a);
  out.x.push_back(x);
  for (int k = 0; k < n_steps; ++k) {
    const double t = a + k * h;
    try {
      const Vec k1 = f(t, x);
      const Vec k2 = f(t + 0.5 * h, Vec(x + 0.5 * h * k1));
      const Vec k3 = f(t + 0.5 * h, Vec(x + 0.5 * h * k2));
      const Vec k4 = f(t + h, Vec(x + h * k3));
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " (propagation step " + std::to_string(k) + ")");
    }
    out.t.push_back(k + 1 == n_steps ? b : a + (k + 1) * h);
    out.x.push_back(x);
  }
  return out;
}

}  // namespace entry_cvx

#endif
