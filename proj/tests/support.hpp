#ifndef ENTRY_CVX_TESTS_SUPPORT_HPP
#define ENTRY_CVX_TESTS_SUPPORT_HPP

#include "entry_cvx/dynamics.hpp"
#include "entry_cvx/models.hpp"

#include <random>

namespace test_support {

using namespace entry_cvx;

/// Uniformly drawn entry states inside the flight envelope (nondimensional, sigma/tau included).
inline Vec8 random_state(const EntryModel& M, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto lerp = [&](double a, double b) { return a + (b - a) * U(rng); };
  Vec8 x;
  x(ix::r) = M.radius_from_altitude(lerp(5e3, 125e3));
  x(ix::theta) = lerp(-100.0, -60.0) * kDegToRad;
  x(ix::phi) = lerp(-50.0, -35.0) * kDegToRad;
  x(ix::V) = lerp(300.0, 6000.0) / M.scale.V_s;
  x(ix::gamma) = lerp(-20.0, 10.0) * kDegToRad;
  x(ix::psi) = lerp(20.0, 100.0) * kDegToRad;
  x(ix::sigma) = lerp(-80.0, 80.0) * kDegToRad;
  x(ix::tau) = lerp(0.0, 0.4);
  return x;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace test_support

#endif
