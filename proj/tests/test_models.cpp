#include "entry_cvx/models.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace entry_cvx;
using test_support::rel_err;

TEST(Scaling, MarsReferenceValues) {
  const Scaling s = make_scaling(PlanetModel{});
  // sqrt(3397200 / 3.7114) and sqrt(3397200 * 3.7114) evaluated by hand
  EXPECT_NEAR(s.t_s, 956.73503, 1e-4);
  EXPECT_NEAR(s.V_s, 3550.82639, 1e-4);
  EXPECT_NEAR(s.t_s * s.V_s, 3397200.0, 1e-6);
}

TEST(Scaling, UnitPlanet) {
  PlanetModel p;
  p.R0 = 1.0;
  p.g0 = 1.0;
  const Scaling s = make_scaling(p);
  EXPECT_DOUBLE_EQ(s.t_s, 1.0);
  EXPECT_DOUBLE_EQ(s.V_s, 1.0);
}

TEST(Scaling, Identities) {
  for (double R0 : {1.0, 6378e3, 3397.2e3, 1737e3})
    for (double g0 : {1.0, 9.81, 3.7114, 1.62}) {
      PlanetModel p;
      p.R0 = R0;
      p.g0 = g0;
      const Scaling s = make_scaling(p);
      EXPECT_LT(rel_err(s.t_s * s.V_s, R0), 1e-12);
      EXPECT_LT(rel_err(s.t_s * s.t_s * g0, R0), 1e-12);
      EXPECT_LT(rel_err(s.V_s * s.V_s, R0 * g0), 1e-12);
    }
}

TEST(Density, EFoldingAndEntryAltitude) {
  const EntryModel M;
  EXPECT_LT(rel_err(M.density(M.radius_from_altitude(M.planet.h_s)), 0.0158 / std::exp(1.0)), 1e-12);
  EXPECT_NEAR(M.density(M.radius_from_altitude(125e3)), 2.49e-8, 0.01e-8);
  EXPECT_LT(rel_err(M.density(M.radius_from_altitude(125e3)), 0.0158 * std::exp(-125000.0 / 9354.5)), 1e-12);
}

TEST(Density, StrictlyDecreasing) {
  const EntryModel M;
  double prev = M.density(1.0);
  for (double h = 1e3; h <= 125e3; h += 1e3) {
    const double d = M.density(M.radius_from_altitude(h));
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Aero, HandEvaluationAtEntry) {
  const EntryModel M;
  const double rho = 0.0158 * std::exp(-125000.0 / 9354.5);
  const double q = 0.5 * rho * 5500.0 * 5500.0;
  const double D_si = q * 15.9 * 1.45 / 2804.0;
  const double L_si = q * 15.9 * 0.36 / 2804.0;
  const auto a = M.aero(M.radius_from_altitude(125e3), 5500.0 / M.scale.V_s);
  EXPECT_LT(rel_err(a.D * 3.7114, D_si), 1e-12);
  EXPECT_LT(rel_err(a.L * 3.7114, L_si), 1e-12);
}

TEST(Aero, ZeroLiftAndRatio) {
  VehicleModel v;
  v.C_L = 0.0;
  const EntryModel M0(PlanetModel{}, v);
  const EntryModel M;
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Vec8 x = test_support::random_state(M, rng);
    EXPECT_EQ(M0.aero(x(ix::r), x(ix::V)).L, 0.0);
    const auto a = M.aero(x(ix::r), x(ix::V));
    EXPECT_LT(rel_err(a.L / a.D, 0.36 / 1.45), 1e-14);
  }
}

TEST(PathValues, VanishingSpeed) {
  const EntryModel M;
  const PathValues p = path_values(M, M.radius_from_altitude(40e3), 0.0);
  EXPECT_EQ(p.Qdot, 0.0);
  EXPECT_EQ(p.q, 0.0);
  EXPECT_EQ(p.a, 0.0);
}

TEST(PathValues, UnitConversionOracle) {
  const EntryModel M;
  const double h = 40000.0, V = 3000.0;
  const double rho = 0.0158 * std::exp(-h / 9354.5);
  // heat rate in W/m^2 then divided by 1e4 for W/cm^2
  const double qdot = 1.9027e-4 * std::sqrt(rho / 6.476) * std::pow(V, 3.15) / 1.0e4;
  const double qdyn = 0.5 * rho * V * V;
  const double acc = qdyn * 15.9 * std::hypot(1.45, 0.36) / 2804.0 / 3.7114;
  const PathValues p = path_values(M, M.radius_from_altitude(h), V / M.scale.V_s);
  EXPECT_LT(rel_err(p.Qdot, qdot), 1e-12);
  EXPECT_LT(rel_err(p.q, qdyn), 1e-12);
  EXPECT_LT(rel_err(p.a, acc), 1e-12);
}

TEST(PathGradients, SignStructure) {
  const EntryModel M;
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec8 x = test_support::random_state(M, rng);
    const auto g = path_gradients(M, x(ix::r), x(ix::V));
    for (int j = 0; j < 3; ++j) {
      EXPECT_LT(g.d_r(j), 0.0);
      EXPECT_GT(g.d_V(j), 0.0);
    }
  }
}

TEST(PathGradients, MatchCentralDifferences) {
  const EntryModel M;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double r = M.radius_from_altitude(125e3 * U(rng));
    const double V = (100.0 + 5900.0 * U(rng)) / M.scale.V_s;
    const auto g = path_gradients(M, r, V);
    const double hr = 1e-7, hv = 1e-6 * V;
    const auto rp = path_values(M, r + hr, V).as_vector(), rm = path_values(M, r - hr, V).as_vector();
    const auto vp = path_values(M, r, V + hv).as_vector(), vm = path_values(M, r, V - hv).as_vector();
    for (int j = 0; j < 3; ++j) {
      worst = std::max(worst, rel_err(g.d_r(j), (rp(j) - rm(j)) / (2 * hr)));
      worst = std::max(worst, rel_err(g.d_V(j), (vp(j) - vm(j)) / (2 * hv)));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(PathValues, IncreasingInSpeed) {
  const EntryModel M;
  const double r = M.radius_from_altitude(30e3);
  PathValues prev = path_values(M, r, 0.01);
  for (double V = 0.02; V < 1.8; V += 0.01) {
    const PathValues p = path_values(M, r, V);
    EXPECT_GT(p.Qdot, prev.Qdot);
    EXPECT_GT(p.q, prev.q);
    EXPECT_GT(p.a, prev.a);
    prev = p;
  }
}
