#ifndef ENTRY_CVX_TESTS_BRUTE_FORCE_ORACLE_HPP
#define ENTRY_CVX_TESTS_BRUTE_FORCE_ORACLE_HPP

// Reference optimizer for tiny cone programs, independent of the interior-point
// solver: dense random sampling of the feasible set for a starting point, then
// a primal log-barrier path followed with damped Newton steps on dense data.

#include "entry_cvx/socp/cone_program.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace oracle {

using entry_cvx::socp::ConeProgram;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Result {
  VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
};

class BarrierOracle {
 public:
  explicit BarrierOracle(const ConeProgram& p) : p_(p), G_(p.G), A_(p.A) {
    const int n = p.n();
    if (p.p() > 0) {
      Eigen::FullPivLU<MatrixXd> lu(A_);
      Z_ = lu.kernel();
      x_part_ = A_.completeOrthogonalDecomposition().solve(p.b);
    } else {
      Z_ = MatrixXd::Identity(n, n);
      x_part_ = VectorXd::Zero(n);
    }
  }

  /// Returns nullopt when sampling finds no strictly feasible point.
  std::optional<Result> solve(const VectorXd& center, double radius, int samples, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const int k = static_cast<int>(Z_.cols());
    const VectorXd w_center = Z_.completeOrthogonalDecomposition().solve(center - x_part_);

    std::optional<VectorXd> best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      VectorXd dir(k);
      for (int j = 0; j < k; ++j) dir(j) = nd(rng);
      if (dir.norm() > 0) dir.normalize();
      const VectorXd w = w_center + radius * std::pow(ud(rng), 1.0 / std::max(k, 1)) * dir;
      const VectorXd x = x_part_ + Z_ * w;
      if (!strictly_feasible(x)) continue;
      const double o = p_.c.dot(x);
      if (o < best_obj) {
        best_obj = o;
        best = w;
      }
    }
    if (!best) return std::nullopt;
    VectorXd w = *best;

    const double m = static_cast<double>(p_.cones.degree());
    for (double t = 1.0; m / t > 1e-11; t *= 8.0) w = newton(w, t);
    Result r;
    r.x = x_part_ + Z_ * w;
    r.objective = p_.c.dot(r.x);
    return r;
  }

 private:
  bool strictly_feasible(const VectorXd& x) const { return std::isfinite(barrier(slack(x))); }

  VectorXd slack(const VectorXd& x) const { return p_.h - G_ * x; }

  double barrier(const VectorXd& s) const {
    double f = 0.0;
    for (int i = 0; i < p_.cones.orthant; ++i) {
      if (!(s(i) > 0)) return std::numeric_limits<double>::infinity();
      f -= std::log(s(i));
    }
    int off = p_.cones.orthant;
    for (int q : p_.cones.soc) {
      const double s0 = s(off);
      const double res = s0 * s0 - s.segment(off + 1, q - 1).squaredNorm();
      if (!(s0 > 0 && res > 0)) return std::numeric_limits<double>::infinity();
      f -= std::log(res);
      off += q;
    }
    return f;
  }

  double phi(const VectorXd& w, double t) const {
    const VectorXd x = x_part_ + Z_ * w;
    const double b = barrier(slack(x));
    return std::isfinite(b) ? t * p_.c.dot(x) + b : std::numeric_limits<double>::infinity();
  }

  VectorXd newton(VectorXd w, double t) const {
    for (int it = 0; it < 200; ++it) {
      const VectorXd x = x_part_ + Z_ * w;
      const VectorXd s = slack(x);
      // gradient and Hessian of the barrier w.r.t. s, then chain through s = h - G x
      VectorXd gs = VectorXd::Zero(s.size());
      MatrixXd Hs = MatrixXd::Zero(s.size(), s.size());
      for (int i = 0; i < p_.cones.orthant; ++i) {
        gs(i) = -1.0 / s(i);
        Hs(i, i) = 1.0 / (s(i) * s(i));
      }
      int off = p_.cones.orthant;
      for (int q : p_.cones.soc) {
        VectorXd Js = s.segment(off, q);
        Js.tail(q - 1) *= -1.0;
        const double res = s(off) * s(off) - s.segment(off + 1, q - 1).squaredNorm();
        gs.segment(off, q) = -2.0 * Js / res;
        MatrixXd J = MatrixXd::Identity(q, q);
        J.bottomRightCorner(q - 1, q - 1) *= -1.0;
        Hs.block(off, off, q, q) = -2.0 * J / res + 4.0 * Js * Js.transpose() / (res * res);
        off += q;
      }
      const MatrixXd GZ = G_ * Z_;
      const VectorXd g = t * (Z_.transpose() * p_.c) - GZ.transpose() * gs;
      const MatrixXd H = GZ.transpose() * Hs * GZ + 1e-300 * MatrixXd::Identity(Z_.cols(), Z_.cols());
      const VectorXd dw = -H.ldlt().solve(g);
      const double dec2 = -g.dot(dw);
      if (!(dec2 > 1e-20)) break;
      double a = 1.0;
      const double f0 = phi(w, t);
      while (a > 1e-16 && !(phi(w + a * dw, t) <= f0 - 0.25 * a * dec2)) a *= 0.5;
      if (a <= 1e-16) break;
      w += a * dw;
    }
    return w;
  }

  const ConeProgram& p_;
  MatrixXd G_, A_, Z_;
  VectorXd x_part_;
};

}  // namespace oracle

#endif
