#include "entry_cvx/dynamics.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace entry_cvx;
using test_support::random_state;
using test_support::rel_err;

namespace {

EntryModel no_rotation() {
  PlanetModel p;
  p.omega_dim = 0.0;
  return EntryModel(p, VehicleModel{});
}

Vec6 entry_state(const EntryModel& M) {
  Vec6 x;
  x << M.radius_from_altitude(125e3), -90.0 * kDegToRad, -45.0 * kDegToRad, 5500.0 / M.scale.V_s,
      -13.5 * kDegToRad, 85.0 * kDegToRad;
  return x;
}

Vec7 time_state(const EntryModel& M) {
  Vec7 x;
  x << entry_state(M), 0.0;
  return x;
}

}  // namespace

TEST(RangeDynamics, LevelFlightAndDueNorth) {
  const EntryModel M;
  Vec6 x = entry_state(M);
  x(ix::gamma) = 0.0;
  EXPECT_EQ(rhs_range(M, x, 0.3)(ix::r), 0.0);
  x = entry_state(M);
  x(ix::psi) = 0.0;
  const Vec6 f = rhs_range(M, x, 0.3);
  EXPECT_EQ(f(ix::theta), 0.0);
  EXPECT_DOUBLE_EQ(f(ix::phi), 1.0 / x(ix::r));
}

TEST(RangeDynamics, RotationDifferenceIsolated) {
  const EntryModel M, M0 = no_rotation();
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec8 x = random_state(M, rng);
    const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi);
    const double W = M.omega;
    // time-domain rotation accelerations divided by ds/dtau = V cos(gamma)
    const double ds = V * std::cos(g);
    Vec6 expect = Vec6::Zero();
    expect(ix::V) = W * W * r * std::cos(phi) *
                    (std::sin(g) * std::cos(phi) - std::cos(g) * std::sin(phi) * std::cos(psi)) / ds;
    expect(ix::gamma) = (2 * W * V * std::cos(phi) * std::sin(psi) +
                         W * W * r * std::cos(phi) *
                             (std::cos(g) * std::cos(phi) + std::sin(g) * std::cos(psi) * std::sin(phi))) /
                        V / ds;
    expect(ix::psi) = (-2 * W * V * (std::tan(g) * std::cos(psi) * std::cos(phi) - std::sin(phi)) +
                       W * W * r * std::sin(psi) * std::sin(phi) * std::cos(phi) / std::cos(g)) /
                      V / ds;
    const Vec6 diff = rhs_range(M, x.head<6>(), x(ix::sigma)) - rhs_range(M0, x.head<6>(), x(ix::sigma));
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(diff(j), expect(j), 1e-12 * (1 + std::abs(expect(j))));
  }
}

TEST(RangeDynamics, ChainRuleAgainstTimeDomain) {
  const EntryModel M;
  std::mt19937 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Vec8 x = random_state(M, rng);
    const Vec7 ft = rhs_time(M, x.head<6>(), x(ix::sigma));
    const Vec6 fs = rhs_range(M, x.head<6>(), x(ix::sigma));
    const double ds = x(ix::V) * std::cos(x(ix::gamma));
    EXPECT_LT(rel_err(ft(ix::s), ds), 1e-15);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(ft(j) / ds, fs(j), 1e-12 * (1 + std::abs(fs(j))));
  }
}

TEST(EnergyRate, DragPowerWithoutRotation) {
  const EntryModel M0 = no_rotation();
  std::mt19937 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vec8 x = random_state(M0, rng);
    const auto a = M0.aero(x(ix::r), x(ix::V));
    EXPECT_LT(rel_err(energy_rate(M0, x.head<6>(), x(ix::sigma)), a.D * x(ix::V)), 1e-12);
  }
}

TEST(EnergyRate, RotationTermMatchesClosedForm) {
  const EntryModel M;
  std::mt19937 rng(29);
  for (int i = 0; i < 100; ++i) {
    const Vec8 x = random_state(M, rng);
    const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi);
    const double W = M.omega;
    const double D = M.aero(r, V).D;
    const double expect = D * V - W * W * r * V * std::cos(phi) *
                                      (std::sin(g) * std::cos(phi) - std::cos(g) * std::sin(phi) * std::cos(psi));
    EXPECT_NEAR(energy_rate(M, x.head<6>(), x(ix::sigma)), expect, 1e-12 * std::abs(expect) + 1e-16);
  }
}

TEST(AugmentedDynamics, BankAndTimeRows) {
  const EntryModel M;
  std::mt19937 rng(31);
  for (int i = 0; i < 20; ++i) {
    const Vec8 x = random_state(M, rng);
    const double sf = 0.27;
    const Vec8 f0 = rhs_augmented(M, x, 0.0, sf);
    EXPECT_EQ(f0(ix::sigma), 0.0);
    EXPECT_LT(rel_err(f0(ix::tau), sf / (x(ix::V) * std::cos(x(ix::gamma)))), 1e-15);
    EXPECT_DOUBLE_EQ(rhs_augmented(M, x, -3.0, sf)(ix::sigma), -3.0 * sf);
  }
}

TEST(AugmentedDynamics, TimeIntegralMatchesTimeDomainRun) {
  const EntryModel M;
  const double sigma = -50.0 * kDegToRad, sf = 820e3 / M.planet.R0;
  Vec8 x0;
  x0 << entry_state(M), sigma, 0.0;
  auto fr = [&](double, const Vec8& x) { return rhs_augmented(M, x, 0.0, sf); };
  const Vec8 xr = propagate<Vec8>(fr, x0, 0.0, 1.0, 4000).final_state();
  const double tau_f = xr(ix::tau);
  auto ft = [&](double, const Vec7& x) { return rhs_time(M, x, sigma); };
  const Vec7 xt = propagate<Vec7>(ft, time_state(M), 0.0, tau_f, 4000).final_state();
  // same flight time must cover the same downrange
  EXPECT_LT(rel_err(xt(ix::s), sf), 1e-3);
  EXPECT_NEAR(xt(ix::r), xr(ix::r), 1e-3 * xr(ix::r));
}

TEST(Propagate, ScalarExponential) {
  auto f = [](double, const Eigen::Matrix<double, 1, 1>& x) { return Eigen::Matrix<double, 1, 1>(x); };
  const Eigen::Matrix<double, 1, 1> one = Eigen::Matrix<double, 1, 1>::Ones();
  EXPECT_NEAR(propagate(f, one, 0.0, 1.0, 100).final_state()(0), std::exp(1.0), 1e-8);
  const double e1 = std::abs(propagate(f, one, 0.0, 1.0, 10).final_state()(0) - std::exp(1.0));
  const double e2 = std::abs(propagate(f, one, 0.0, 1.0, 20).final_state()(0) - std::exp(1.0));
  EXPECT_NEAR(e1 / e2, 16.0, 1.0);
}

TEST(Propagate, StepHalvingOnOpenLoopScenario) {
  const EntryModel M;
  const double sigma = -50.0 * kDegToRad;
  const double T = 279.18 / M.scale.t_s;
  auto f = [&](double, const Vec7& x) { return rhs_time(M, x, sigma); };
  const Vec7 a = propagate<Vec7>(f, time_state(M), 0.0, T, 2000).final_state();
  const Vec7 b = propagate<Vec7>(f, time_state(M), 0.0, T, 4000).final_state();
  EXPECT_LT(std::abs(a(ix::r) - b(ix::r)) * M.planet.R0, 0.5);
}

TEST(Propagate, RangeIncreasesMonotonically) {
  const EntryModel M;
  auto f = [&](double, const Vec7& x) { return rhs_time(M, x, -50.0 * kDegToRad); };
  const auto pr = propagate<Vec7>(f, time_state(M), 0.0, 279.0 / M.scale.t_s, 2000);
  for (std::size_t i = 1; i < pr.x.size(); ++i) EXPECT_GT(pr.x[i](ix::s), pr.x[i - 1](ix::s));
  EXPECT_TRUE(pr.independent_variable_increasing());
}

TEST(Dynamics, DomainErrors) {
  const EntryModel M;
  Vec6 x = entry_state(M);
  x(ix::V) = 0.0;
  EXPECT_THROW(rhs_range(M, x, 0.0), DomainError);
  x = entry_state(M);
  x(ix::gamma) = 0.5 * std::numbers::pi;
  EXPECT_THROW(rhs_time(M, x, 0.0), DomainError);
}
