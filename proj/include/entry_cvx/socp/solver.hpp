#ifndef ENTRY_CVX_SOCP_SOLVER_HPP
#define ENTRY_CVX_SOCP_SOLVER_HPP

#include "entry_cvx/socp/cone_program.hpp"
#include "entry_cvx/socp/cones.hpp"
#include "entry_cvx/socp/ldl.hpp"
#include "entry_cvx/socp/presolve.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>
#include <vector>

namespace entry_cvx::socp {

struct SolverSettings {
  double tol = 1e-8;
  int max_iter = 100;
  double static_reg = 1e-9;
  int refine_steps = 10;
  double step_fraction = 0.99;
  bool equilibrate = true;
  int ruiz_iterations = 25;
  bool verbose = false;
};

namespace detail {

/// Assembled upper triangle of the regularized KKT matrix
///   [ dI   A'   G'   ]
///   [ A   -dI   0    ]
///   [ G    0   -W^2  ]
/// Each Lorentz block of W^2 is kept in the lifted sparse form
/// eta^2 (D + u u' - v v') with two auxiliary rows per cone, which avoids
/// forming the badly conditioned dense block near the cone boundary.
class KktSystem {
 public:
  KktSystem(const ConeProgram& p, double reg) : p_(p), reg_(reg) {
    n_ = p.n();
    np_ = p.p();
    m_ = p.m();
    const int nsoc = static_cast<int>(p.cones.soc.size());
    dim_ = n_ + np_ + m_ + 2 * nsoc;
    std::vector<Triplet> t;
    t.reserve(p.A.nonZeros() + p.G.nonZeros() + dim_ + 2 * m_);
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, reg_);
    for (int j = 0; j < p.A.outerSize(); ++j)
      for (SpMat::InnerIterator it(p.A, j); it; ++it) t.emplace_back(j, n_ + it.row(), it.value());
    for (int j = 0; j < p.G.outerSize(); ++j)
      for (SpMat::InnerIterator it(p.G, j); it; ++it) t.emplace_back(j, n_ + np_ + it.row(), it.value());
    for (int i = 0; i < np_; ++i) t.emplace_back(n_ + i, n_ + i, -reg_);
    const int z0 = n_ + np_;
    for (int i = 0; i < m_; ++i) t.emplace_back(z0 + i, z0 + i, -1.0);
    const int e0 = n_ + np_ + m_;
    int off = p.cones.orthant;
    for (int k = 0; k < nsoc; ++k) {
      const int q = p.cones.soc[k];
      const int vb = e0 + 2 * k, ua = vb + 1;
      for (int r = 0; r < q; ++r) {
        t.emplace_back(z0 + off + r, vb, 0.0);
        t.emplace_back(z0 + off + r, ua, 0.0);
      }
      t.emplace_back(vb, vb, -1.0);
      t.emplace_back(ua, ua, 1.0);
      off += q;
    }
    K_.resize(dim_, dim_);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();

    auto slot = [this](int r, int c) {
      for (int k = K_.outerIndexPtr()[c]; k < K_.outerIndexPtr()[c + 1]; ++k)
        if (K_.innerIndexPtr()[k] == r) return k;
      return -1;
    };
    for (int i = 0; i < n_ + np_; ++i) primal_slots_.push_back(slot(i, i));
    for (int i = 0; i < m_; ++i) diag_slots_.push_back(slot(z0 + i, z0 + i));
    off = p.cones.orthant;
    for (int k = 0; k < nsoc; ++k) {
      const int q = p.cones.soc[k];
      const int vb = e0 + 2 * k, ua = vb + 1;
      LiftSlots ls;
      for (int r = 0; r < q; ++r) {
        ls.v.push_back(slot(z0 + off + r, vb));
        ls.u.push_back(slot(z0 + off + r, ua));
      }
      ls.vd = slot(vb, vb);
      ls.ud = slot(ua, ua);
      lift_slots_.push_back(std::move(ls));
      off += q;
    }
    signs_ = Eigen::VectorXd::Ones(dim_);
    signs_.segment(n_, np_ + m_).setConstant(-1.0);
    for (int k = 0; k < nsoc; ++k) signs_(e0 + 2 * k) = -1.0;
    ldl_.analyze(K_);
  }

  /// Changes the static regularization; the cone block picks it up on the next set_*scaling call.
  void set_regularization(double reg) {
    reg_ = reg;
    double* v = K_.valuePtr();
    for (int i = 0; i < n_; ++i) v[primal_slots_[i]] = reg_;
    for (int i = n_; i < n_ + np_; ++i) v[primal_slots_[i]] = -reg_;
  }

  double regularization() const { return reg_; }

  void set_identity_scaling() {
    double* v = K_.valuePtr();
    for (int s : diag_slots_) v[s] = -1.0;
    for (const LiftSlots& ls : lift_slots_) {
      for (int s : ls.v) v[s] = 0.0;
      for (int s : ls.u) v[s] = 0.0;
      v[ls.vd] = -1.0;
      v[ls.ud] = 1.0;
    }
  }

  void set_scaling(const NTScaling& W) {
    double* v = K_.valuePtr();
    for (int i = 0; i < p_.cones.orthant; ++i) v[diag_slots_[i]] = -W.w(i) * W.w(i);
    int off = p_.cones.orthant;
    for (std::size_t k = 0; k < lift_slots_.size(); ++k) {
      const int q = p_.cones.soc[k];
      const LiftSlots& ls = lift_slots_[k];
      const VectorXd& wb = W.wbar[k];
      const double e2 = W.eta[k] * W.eta[k];
      // 2 wb wb' - J = D + u u' - v v' with D = diag(d1, I), u = (u0, u1 w1), v = (0, v1 w1).
      const double a = wb(0);
      const double w1sq = wb.tail(q - 1).squaredNorm();
      const double big = a * a + w1sq;
      const double d1 = 0.5 / big;
      const double u0 = std::sqrt(big - d1);
      const double u1 = 2.0 * a / u0;
      const double v1 = std::sqrt(2.0 * (1.0 + d1)) / u0;
      v[diag_slots_[off]] = -e2 * d1;
      for (int r = 1; r < q; ++r) v[diag_slots_[off + r]] = -e2;
      v[ls.v[0]] = 0.0;
      v[ls.u[0]] = -e2 * u0;
      for (int r = 1; r < q; ++r) {
        v[ls.v[r]] = e2 * v1 * wb(r);
        v[ls.u[r]] = -e2 * u1 * wb(r);
      }
      v[ls.vd] = -e2;
      v[ls.ud] = e2;
      off += q;
    }
  }

  int factor() { return ldl_.factor(K_, signs_); }

  /// Solves the unregularized system with iterative refinement.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs_short, int refine) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_);
    rhs.head(rhs_short.size()) = rhs_short;
    Eigen::VectorXd x = ldl_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd r = rhs - multiply(x);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < refine && rn > 1e-13 * scale; ++k) {
      const Eigen::VectorXd xn = x + ldl_.solve(r);
      Eigen::VectorXd r2 = rhs - multiply(xn);
      const double rn2 = r2.lpNorm<Eigen::Infinity>();
      if (!(rn2 < rn)) break;
      x = xn;
      r = std::move(r2);
      const bool slow = rn2 * 5.0 > rn;
      rn = rn2;
      if (slow) break;
    }
    return x.head(rhs_short.size());
  }

  int n() const { return n_; }
  int p() const { return np_; }
  int m() const { return m_; }

 private:
  struct LiftSlots {
    std::vector<int> v, u;
    int vd = -1, ud = -1;
  };

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = K_.selfadjointView<Eigen::Upper>() * x;
    y.head(n_ + np_) -= reg_ * signs_.head(n_ + np_).cwiseProduct(x.head(n_ + np_));
    return y;
  }

  const ConeProgram& p_;
  double reg_;
  int n_ = 0, np_ = 0, m_ = 0, dim_ = 0;
  SpMat K_;
  std::vector<int> primal_slots_, diag_slots_;
  std::vector<LiftSlots> lift_slots_;
  Eigen::VectorXd signs_;
  QuasiDefiniteLDL ldl_;
};

struct Direction {
  VectorXd x, y, z, s;
  double tau = 0, kappa = 0;
};

}  // namespace detail

/// Primal-dual interior-point method on the homogeneous self-dual embedding with
/// Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
class InteriorPointSolver : public ConeSolver {
 public:
  InteriorPointSolver() = default;
  explicit InteriorPointSolver(SolverSettings s) : settings_(s) {}

  const SolverSettings& settings() const { return settings_; }

  Solution solve(const ConeProgram& original) override {
    original.validate();
    ConeProgram base = original;
    if (base.A.rows() == 0) base.A.resize(0, base.n());

    ConeProgram scaled;
    Equilibration eq;
    if (settings_.equilibrate) {
      std::tie(scaled, eq) = presolve_scale(base, settings_.ruiz_iterations);
    } else {
      scaled = base;
      eq.D = VectorXd::Ones(base.n());
      eq.E = VectorXd::Ones(base.p());
      eq.F = VectorXd::Ones(base.m());
    }
    return run(base, scaled, eq);
  }

 private:
  Solution run(const ConeProgram& orig, const ConeProgram& P, const Equilibration& eq) {
    const ConeSpec& K = P.cones;
    const int n = P.n(), np = P.p(), m = P.m();
    const double nu = static_cast<double>(K.degree());
    Solution sol;

    detail::KktSystem kkt(P, settings_.static_reg);
    auto split = [&](const VectorXd& v, VectorXd& x, VectorXd& y, VectorXd& z) {
      x = v.head(n);
      y = v.segment(n, np);
      z = v.tail(m);
    };
    auto stack = [&](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
      VectorXd v(n + np + m);
      v << a, b, c;
      return v;
    };

    // Starting point from two least-squares type solves with W = I.
    kkt.set_identity_scaling();
    kkt.factor();
    VectorXd x, y, z, s;
    {
      VectorXd xx, yy, zz;
      split(kkt.solve(stack(VectorXd::Zero(n), P.b, P.h), settings_.refine_steps), xx, yy, zz);
      x = xx;
      s = -zz;
      const double ap = cone::boundary_shift(K, s);
      if (ap >= -1e-8) cone::add_identity(K, s, 1.0 + ap);
      split(kkt.solve(stack(-P.c, VectorXd::Zero(np), VectorXd::Zero(m)), settings_.refine_steps), xx, yy, zz);
      y = yy;
      z = zz;
      const double ad = cone::boundary_shift(K, z);
      if (ad >= -1e-8) cone::add_identity(K, z, 1.0 + ad);
    }
    double tau = 1.0, kappa = 1.0;

    const VectorXd e = cone::identity(K);
    Status status = Status::MaxIterations;
    int iter = 0;

    for (;; ++iter) {
      // Homogeneous residuals.
      const VectorXd rx = P.A.transpose() * y + P.G.transpose() * z + P.c * tau;
      const VectorXd ry = P.A * x - P.b * tau;
      const VectorXd rz = P.G * x + s - P.h * tau;
      const double rt = P.c.dot(x) + P.b.dot(y) + P.h.dot(z) + kappa;

      // Convergence is judged on the original (unscaled) data.
      const VectorXd xo = eq.unscale_x(x) / tau, yo = eq.unscale_y(y) / tau, zo = eq.unscale_z(z) / tau,
                     so = eq.unscale_s(s) / tau;
      sol.residuals = kkt_residuals(orig, xo, yo, zo, so);
      sol.primal_objective = orig.c.dot(xo);
      sol.dual_objective = -(orig.b.dot(yo) + orig.h.dot(zo));
      if (settings_.verbose)
        std::fprintf(stderr, "%3d pcost %+.9e dcost %+.9e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n", iter,
                     sol.primal_objective, sol.dual_objective, sol.residuals.primal, sol.residuals.dual,
                     sol.residuals.gap, tau, kappa);
      if (sol.residuals.primal <= settings_.tol && sol.residuals.dual <= settings_.tol &&
          sol.residuals.gap <= settings_.tol) {
        status = Status::Optimal;
        break;
      }
      if (kappa > tau) {
        const VectorXd yu = eq.unscale_y(y), zu = eq.unscale_z(z), xu = eq.unscale_x(x), su = eq.unscale_s(s);
        const double bh = orig.b.dot(yu) + orig.h.dot(zu);
        VectorXd dres = orig.G.transpose() * zu;
        if (orig.p() > 0) dres += orig.A.transpose() * yu;
        if (bh < 0 && dres.lpNorm<Eigen::Infinity>() <= settings_.tol * -bh) {
          status = Status::PrimalInfeasible;
          break;
        }
        const double cx = orig.c.dot(xu);
        double pres = (orig.G * xu + su).lpNorm<Eigen::Infinity>();
        if (orig.p() > 0) pres = std::max(pres, (orig.A * xu).lpNorm<Eigen::Infinity>());
        if (cx < 0 && pres <= settings_.tol * -cx) {
          status = Status::DualInfeasible;
          break;
        }
      }
      if (iter >= settings_.max_iter) {
        status = Status::MaxIterations;
        break;
      }

      const NTScaling W(K, s, z);
      const VectorXd& lam = W.lambda;
      if (!lam.allFinite()) {
        status = Status::NumericalFailure;
        break;
      }
      const VectorXd ll = cone::jordan_product(K, lam, lam);
      const double mu = (s.dot(z) + tau * kappa) / (nu + 1.0);

      auto step_length = [&](const detail::Direction& d) {
        double a = std::min(cone::max_step(K, s, d.s), cone::max_step(K, z, d.z));
        if (d.tau < 0) a = std::min(a, -tau / d.tau);
        if (d.kappa < 0) a = std::min(a, -kappa / d.kappa);
        return a;
      };
      auto finite = [](const detail::Direction& d) {
        return std::isfinite(d.tau) && std::isfinite(d.kappa) && d.x.allFinite() && d.y.allFinite() &&
               d.z.allFinite() && d.s.allFinite();
      };

      detail::Direction d;
      double a_aff = 0, sigma = 1;
      int nreg = 0;
      // Factor, then predictor and corrector; false if anything came out non-finite.
      auto compute = [&]() {
        kkt.set_scaling(W);
        nreg = kkt.factor();
        VectorXd x2, y2, z2;
        split(kkt.solve(stack(-P.c, P.b, P.h), settings_.refine_steps), x2, y2, z2);
        const double den = P.c.dot(x2) + P.b.dot(y2) + P.h.dot(z2) - kappa / tau;
        if (!std::isfinite(den) || !x2.allFinite() || !y2.allFinite() || !z2.allFinite()) return false;

        auto direction = [&](double eta, const VectorXd& rc, double rk) {
          // W (lambda \ rc) enters the cone rows; ds recovered afterwards.
          const VectorXd wlr = W.apply(cone::jordan_divide(K, lam, rc));
          VectorXd x1, y1, z1;
          split(kkt.solve(stack(-eta * rx, -eta * ry, -eta * rz - wlr), settings_.refine_steps), x1, y1, z1);
          detail::Direction r;
          r.tau = (-eta * rt - rk / tau - P.c.dot(x1) - P.b.dot(y1) - P.h.dot(z1)) / den;
          r.x = x1 + r.tau * x2;
          r.y = y1 + r.tau * y2;
          r.z = z1 + r.tau * z2;
          r.s = wlr - W.apply(W.apply(r.z));
          r.kappa = (rk - kappa * r.tau) / tau;
          return r;
        };

        const detail::Direction aff = direction(1.0, -ll, -tau * kappa);
        if (!finite(aff)) return false;
        a_aff = std::min(1.0, step_length(aff));
        sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);

        const VectorXd corr = cone::jordan_product(K, W.apply_inverse(aff.s), W.apply(aff.z));
        const VectorXd rc = -ll - corr + sigma * mu * e;
        const double rk = -tau * kappa - aff.tau * aff.kappa + sigma * mu;
        d = direction(1.0 - sigma, rc, rk);
        return finite(d);
      };

      bool ok = false;
      double reg = settings_.static_reg;
      for (int attempt = 0; attempt < 4 && !ok; ++attempt, reg *= 100.0) {
        kkt.set_regularization(reg);
        ok = compute();
      }
      const double alpha = ok ? std::min(1.0, settings_.step_fraction * step_length(d)) : 0.0;
      if (settings_.verbose)
        std::fprintf(stderr, "    a_aff %.3e sigma %.3e alpha %.3e mu %.3e dynreg %d reg %.1e\n", a_aff, sigma, alpha, mu,
                     nreg, kkt.regularization());
      if (!ok || !std::isfinite(alpha) || alpha < 1e-12) {
        status = Status::NumericalFailure;
        break;
      }

      x += alpha * d.x;
      y += alpha * d.y;
      z += alpha * d.z;
      s += alpha * d.s;
      tau += alpha * d.tau;
      kappa += alpha * d.kappa;
    }

    sol.status = status;
    sol.iterations = iter;
    const double t = (status == Status::PrimalInfeasible || status == Status::DualInfeasible) ? 1.0 : tau;
    sol.x = eq.unscale_x(x) / t;
    sol.y = eq.unscale_y(y) / t;
    sol.z = eq.unscale_z(z) / t;
    sol.s = eq.unscale_s(s) / t;
    if (status != Status::PrimalInfeasible && status != Status::DualInfeasible)
      sol.residuals = kkt_residuals(orig, sol);
    return sol;
  }

  SolverSettings settings_;
};

/// Convenience wrapper around InteriorPointSolver.
inline Solution solve(const ConeProgram& p, double tol = 1e-8, int max_iter = 100) {
  SolverSettings s;
  s.tol = tol;
  s.max_iter = max_iter;
  return InteriorPointSolver(s).solve(p);
}

}  // namespace entry_cvx::socp

#endif
