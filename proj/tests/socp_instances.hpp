#ifndef ENTRY_CVX_TESTS_SOCP_INSTANCES_HPP
#define ENTRY_CVX_TESTS_SOCP_INSTANCES_HPP

#include "entry_cvx/socp/cone_program.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

namespace socp_instances {

using namespace entry_cvx::socp;
using Eigen::MatrixXd;

inline SpMat sparse(const MatrixXd& M) { return M.sparseView(0.0, 0.0); }

// min x  s.t.  (x, 1, 2) in Q^3
inline ConeProgram sqrt5_problem() {
  ConeProgram p;
  p.c = VectorXd::Ones(1);
  p.A.resize(0, 1);
  p.b.resize(0);
  MatrixXd G(3, 1);
  G << -1, 0, 0;
  p.G = sparse(G);
  p.h = VectorXd(3);
  p.h << 0, 1, 2;
  p.cones.soc = {3};
  return p;
}

// min -x-y  s.t.  x+y <= 1,  x,y >= 0
inline ConeProgram lp_problem() {
  ConeProgram p;
  p.c = VectorXd(2);
  p.c << -1, -1;
  p.A.resize(0, 2);
  p.b.resize(0);
  MatrixXd G(3, 2);
  G << 1, 1, -1, 0, 0, -1;
  p.G = sparse(G);
  p.h = VectorXd(3);
  p.h << 1, 0, 0;
  p.cones.orthant = 3;
  return p;
}

struct RandomInstance {
  ConeProgram p;
  VectorXd center;
  double radius;
};

// Bounded, strictly feasible instance: a ball around a known center, a few
// halfspaces and one extra Lorentz constraint that the center satisfies with
// margin, optionally an equality through the center.
inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(2, 6), kd(0, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.2, 1.0);
  const int n = nd(rng);
  const int nhalf = kd(rng);
  const bool with_eq = (kd(rng) % 2 == 0) && n > 2;
  const int qe = std::min(n, 3);

  RandomInstance ri;
  ri.center = VectorXd::NullaryExpr(n, [&] { return u(rng); });
  ri.radius = 1.0 + pos(rng);

  ConeProgram& p = ri.p;
  p.c = VectorXd::NullaryExpr(n, [&] { return u(rng); });
  std::vector<Triplet> t;
  std::vector<double> h;
  int row = 0;
  for (int i = 0; i < nhalf; ++i) {
    VectorXd a = VectorXd::NullaryExpr(n, [&] { return u(rng); });
    for (int j = 0; j < n; ++j) t.emplace_back(row, j, a(j));
    h.push_back(a.dot(ri.center) + pos(rng) * ri.radius * a.norm() * 0.7);
    ++row;
  }
  // ball: (R, x - center) in Q^{n+1}
  h.push_back(ri.radius);
  ++row;
  for (int j = 0; j < n; ++j) {
    t.emplace_back(row + j, j, -1.0);
    h.push_back(-ri.center(j));
  }
  row += n;
  // extra cone: (g'x + d, F x + f) in Q^{qe+1}
  MatrixXd F = MatrixXd::NullaryExpr(qe, n, [&] { return u(rng); });
  VectorXd f = VectorXd::NullaryExpr(qe, [&] { return u(rng); });
  VectorXd g = VectorXd::NullaryExpr(n, [&] { return 0.3 * u(rng); });
  const double d = (F * ri.center + f).norm() - g.dot(ri.center) + pos(rng);
  for (int j = 0; j < n; ++j) t.emplace_back(row, j, -g(j));
  h.push_back(d);
  for (int i = 0; i < qe; ++i) {
    for (int j = 0; j < n; ++j) t.emplace_back(row + 1 + i, j, -F(i, j));
    h.push_back(f(i));
  }
  row += qe + 1;

  p.G.resize(row, n);
  p.G.setFromTriplets(t.begin(), t.end());
  p.h = Eigen::Map<VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  p.cones.orthant = nhalf;
  p.cones.soc = {n + 1, qe + 1};
  if (with_eq) {
    VectorXd a = VectorXd::NullaryExpr(n, [&] { return u(rng); });
    MatrixXd A = a.transpose();
    p.A = sparse(A);
    p.b = VectorXd::Constant(1, a.dot(ri.center));
  } else {
    p.A.resize(0, n);
    p.b.resize(0);
  }
  return ri;
}

}  // namespace socp_instances

#endif
