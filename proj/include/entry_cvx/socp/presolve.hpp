#ifndef ENTRY_CVX_SOCP_PRESOLVE_HPP
#define ENTRY_CVX_SOCP_PRESOLVE_HPP

#include "entry_cvx/socp/cone_program.hpp"

#include <algorithm>
#include <cmath>

namespace entry_cvx::socp {

/// Diagonal equilibration  x = D x~,  y = E y~ / k,  z = F z~ / k,  s = s~ / F,
/// where the scaled cost is k D c.
struct Equilibration {
  VectorXd D;  // columns
  VectorXd E;  // equality rows
  VectorXd F;  // cone rows, constant within each Lorentz block
  double cost = 1.0;

  VectorXd unscale_x(const VectorXd& xs) const { return D.cwiseProduct(xs); }
  VectorXd unscale_y(const VectorXd& ys) const { return E.cwiseProduct(ys) / cost; }
  VectorXd unscale_z(const VectorXd& zs) const { return F.cwiseProduct(zs) / cost; }
  VectorXd unscale_s(const VectorXd& ss) const { return ss.cwiseQuotient(F); }

  bool is_identity(double tol = 0.0) const {
    auto near_one = [tol](const VectorXd& v) { return v.size() == 0 || (v.array() - 1.0).abs().maxCoeff() <= tol; };
    return near_one(D) && near_one(E) && near_one(F) && std::abs(cost - 1.0) <= tol;
  }
};

namespace detail {

inline void scale_rows_cols(SpMat& M, const VectorXd& rows, const VectorXd& cols) {
  for (int j = 0; j < M.outerSize(); ++j)
    for (SpMat::InnerIterator it(M, j); it; ++it) it.valueRef() *= rows(it.row()) * cols(j);
}

inline VectorXd row_inf_norms(const SpMat& M) {
  VectorXd r = VectorXd::Zero(M.rows());
  for (int j = 0; j < M.outerSize(); ++j)
    for (SpMat::InnerIterator it(M, j); it; ++it) r(it.row()) = std::max(r(it.row()), std::abs(it.value()));
  return r;
}

inline double ruiz_factor(double norm) {
  if (norm <= 0.0) return 1.0;
  return std::clamp(1.0 / std::sqrt(norm), 1e-4, 1e4);
}

}  // namespace detail

/// Ruiz equilibration of [A; G] in the infinity norm.  Row factors of a Lorentz
/// block are shared (the block maximum is used) so the cone is preserved.
inline std::pair<ConeProgram, Equilibration> presolve_scale(const ConeProgram& p, int max_iter = 25,
                                                            double tol = 1e-3) {
  ConeProgram q = p;
  if (q.A.rows() == 0) q.A.resize(0, p.n());
  Equilibration eq;
  eq.D = VectorXd::Ones(p.n());
  eq.E = VectorXd::Ones(p.p());
  eq.F = VectorXd::Ones(p.m());

  for (int it = 0; it < max_iter; ++it) {
    VectorXd cn = VectorXd::Zero(p.n());
    for (const SpMat* M : {&q.A, &q.G})
      for (int j = 0; j < M->outerSize(); ++j)
        for (SpMat::InnerIterator e(*M, j); e; ++e) cn(j) = std::max(cn(j), std::abs(e.value()));
    VectorXd rA = detail::row_inf_norms(q.A);
    VectorXd rG = detail::row_inf_norms(q.G);
    int off = p.cones.orthant;
    for (int k : p.cones.soc) {
      const double mx = rG.segment(off, k).maxCoeff();
      rG.segment(off, k).setConstant(mx);
      off += k;
    }

    double worst = 0.0;
    auto track = [&worst](const VectorXd& v) {
      for (int i = 0; i < v.size(); ++i)
        if (v(i) > 0) worst = std::max(worst, std::abs(1.0 - v(i)));
    };
    track(cn);
    track(rA);
    track(rG);
    if (worst <= tol) break;

    VectorXd dc = cn.unaryExpr(&detail::ruiz_factor);
    VectorXd de = rA.unaryExpr(&detail::ruiz_factor);
    VectorXd df = rG.unaryExpr(&detail::ruiz_factor);
    detail::scale_rows_cols(q.A, de, dc);
    detail::scale_rows_cols(q.G, df, dc);
    eq.D = eq.D.cwiseProduct(dc);
    eq.E = eq.E.cwiseProduct(de);
    eq.F = eq.F.cwiseProduct(df);
  }
  q.c = p.c.cwiseProduct(eq.D);
  const double cn = q.c.size() ? q.c.lpNorm<Eigen::Infinity>() : 0.0;
  if (cn > 0.0) eq.cost = std::clamp(1.0 / cn, 1e-4, 1e4);
  q.c *= eq.cost;
  q.b = p.b.cwiseProduct(eq.E);
  q.h = p.h.cwiseProduct(eq.F);
  return {std::move(q), std::move(eq)};
}

}  // namespace entry_cvx::socp

#endif
