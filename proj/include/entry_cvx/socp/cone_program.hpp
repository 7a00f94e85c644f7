#ifndef ENTRY_CVX_SOCP_CONE_PROGRAM_HPP
#define ENTRY_CVX_SOCP_CONE_PROGRAM_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace entry_cvx::socp {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;
using Eigen::VectorXd;

/// K = R^p_+ x Q^{q_1} x ... x Q^{q_m}; rows of G are ordered the same way.
struct ConeSpec {
  int orthant = 0;
  std::vector<int> soc;

  int dim() const {
    int d = orthant;
    for (int q : soc) d += q;
    return d;
  }
  /// Barrier degree: one per orthant coordinate, one per Lorentz cone.
  int degree() const { return orthant + static_cast<int>(soc.size()); }
};

///   minimize c'x  subject to  A x = b,  G x + s = h,  s in K
struct ConeProgram {
  VectorXd c;
  SpMat A;
  VectorXd b;
  SpMat G;
  VectorXd h;
  ConeSpec cones;

  int n() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(b.size()); }
  int m() const { return static_cast<int>(h.size()); }

  void validate() const {
    const int nv = n();
    if (A.cols() != nv && !(A.rows() == 0))
      throw std::invalid_argument("cone program: A has " + std::to_string(A.cols()) + " columns, expected " +
                                  std::to_string(nv));
    if (A.rows() != p()) throw std::invalid_argument("cone program: rows(A) != size(b)");
    if (G.cols() != nv) throw std::invalid_argument("cone program: G column count != size(c)");
    if (G.rows() != m()) throw std::invalid_argument("cone program: rows(G) != size(h)");
    if (cones.orthant < 0) throw std::invalid_argument("cone program: negative orthant size");
    for (int q : cones.soc)
      if (q < 1) throw std::invalid_argument("cone program: second-order cone dimension < 1");
    if (cones.dim() != m()) throw std::invalid_argument("cone program: cone dimensions do not sum to rows(G)");
    if (!c.allFinite() || !b.allFinite() || !h.allFinite())
      throw std::invalid_argument("cone program: non-finite data");
  }
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::PrimalInfeasible: return "primal_infeasible";
    case Status::DualInfeasible: return "dual_infeasible";
    case Status::MaxIterations: return "max_iterations";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct Residuals {
  double primal = 0;
  double dual = 0;
  double gap = 0;
};

struct Solution {
  VectorXd x;
  VectorXd y;  // equality multipliers
  VectorXd z;  // cone multipliers
  VectorXd s;  // cone slacks
  Status status = Status::NumericalFailure;
  Residuals residuals;
  int iterations = 0;
  double primal_objective = 0;
  double dual_objective = 0;
};

/// Relative KKT residuals of a candidate primal-dual point:
///   primal = max(|Ax-b|/(1+|b|), |Gx+s-h|/(1+|h|)),
///   dual   = |c + A'y + G'z|/(1+|c|),
///   gap    = |c'x + b'y + h'z|/(1+min(|primal obj|, |dual obj|)).
/// Norms are infinity norms.
inline Residuals kkt_residuals(const ConeProgram& p, const VectorXd& x, const VectorXd& y, const VectorXd& z,
                               const VectorXd& s) {
  auto inf = [](const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };
  Residuals r;
  double pe = 0;
  if (p.p() > 0) pe = inf(p.A * x - p.b) / (1.0 + inf(p.b));
  const double pc = p.m() > 0 ? inf(p.G * x + s - p.h) / (1.0 + inf(p.h)) : 0.0;
  r.primal = std::max(pe, pc);
  VectorXd rd = p.c;
  if (p.p() > 0) rd += p.A.transpose() * y;
  if (p.m() > 0) rd += p.G.transpose() * z;
  r.dual = inf(rd) / (1.0 + inf(p.c));
  const double pobj = p.c.dot(x);
  const double dobj = -(p.b.dot(y) + p.h.dot(z));
  r.gap = std::abs(pobj - dobj) / (1.0 + std::min(std::abs(pobj), std::abs(dobj)));
  return r;
}

inline Residuals kkt_residuals(const ConeProgram& p, const Solution& sol) {
  return kkt_residuals(p, sol.x, sol.y, sol.z, sol.s);
}

/// Interface every conic back end implements; the planner only sees this.
class ConeSolver {
 public:
  virtual ~ConeSolver() = default;
  virtual Solution solve(const ConeProgram& p) = 0;
};

}  // namespace entry_cvx::socp

#endif
