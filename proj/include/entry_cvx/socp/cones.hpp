#ifndef ENTRY_CVX_SOCP_CONES_HPP
#define ENTRY_CVX_SOCP_CONES_HPP

#include "entry_cvx/socp/cone_program.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace entry_cvx::socp {

namespace cone {

inline double soc_residual(const Eigen::Ref<const VectorXd>& u) {
  const double r = u.tail(u.size() - 1).norm();
  return (u(0) - r) * (u(0) + r);
}

/// Largest alpha with u + alpha*d in K, u strictly interior (infinity if unbounded).
inline double max_step(const ConeSpec& K, const VectorXd& u, const VectorXd& d) {
  double amax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < K.orthant; ++i)
    if (d(i) < 0) amax = std::min(amax, -u(i) / d(i));
  int off = K.orthant;
  for (int q : K.soc) {
    if (q == 1) {
      if (d(off) < 0) amax = std::min(amax, -u(off) / d(off));
      off += q;
      continue;
    }
    const auto uu = u.segment(off, q);
    const auto dd = d.segment(off, q);
    const double un = std::sqrt(std::max(soc_residual(uu), 1e-300));
    const double u0 = uu(0) / un;
    const VectorXd u1 = uu.tail(q - 1) / un;
    const double d0 = dd(0) / un;
    const VectorXd d1 = dd.tail(q - 1) / un;
    // Lorentz transform taking u/|u|_J to the cone axis.
    const double rho0 = u0 * d0 - u1.dot(d1);
    const double factor = (rho0 + d0) / (u0 + 1.0);
    const double rho1 = (d1 - factor * u1).norm();
    const double t = rho1 - rho0;
    if (t > 0) amax = std::min(amax, 1.0 / t);
    off += q;
  }
  return amax;
}

/// Smallest shift alpha with u + alpha*e on the cone boundary (negative when interior).
inline double boundary_shift(const ConeSpec& K, const VectorXd& u) {
  double a = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < K.orthant; ++i) a = std::max(a, -u(i));
  int off = K.orthant;
  for (int q : K.soc) {
    a = std::max(a, u.segment(off + 1, q - 1).norm() - u(off));
    off += q;
  }
  return a;
}

inline void add_identity(const ConeSpec& K, VectorXd& u, double alpha) {
  for (int i = 0; i < K.orthant; ++i) u(i) += alpha;
  int off = K.orthant;
  for (int q : K.soc) {
    u(off) += alpha;
    off += q;
  }
}

inline VectorXd identity(const ConeSpec& K) {
  VectorXd e = VectorXd::Zero(K.dim());
  add_identity(K, e, 1.0);
  return e;
}

/// Jordan product u o v.
inline VectorXd jordan_product(const ConeSpec& K, const VectorXd& u, const VectorXd& v) {
  VectorXd w(u.size());
  w.head(K.orthant) = u.head(K.orthant).cwiseProduct(v.head(K.orthant));
  int off = K.orthant;
  for (int q : K.soc) {
    const auto uu = u.segment(off, q);
    const auto vv = v.segment(off, q);
    w(off) = uu.dot(vv);
    w.segment(off + 1, q - 1) = uu(0) * vv.tail(q - 1) + vv(0) * uu.tail(q - 1);
    off += q;
  }
  return w;
}

/// Solves lambda o x = r for x.
inline VectorXd jordan_divide(const ConeSpec& K, const VectorXd& lambda, const VectorXd& r) {
  VectorXd x(r.size());
  x.head(K.orthant) = r.head(K.orthant).cwiseQuotient(lambda.head(K.orthant));
  int off = K.orthant;
  for (int q : K.soc) {
    const auto l = lambda.segment(off, q);
    const auto rr = r.segment(off, q);
    const double det = soc_residual(l);
    const double x0 = (l(0) * rr(0) - l.tail(q - 1).dot(rr.tail(q - 1))) / det;
    x(off) = x0;
    x.segment(off + 1, q - 1) = (rr.tail(q - 1) - x0 * l.tail(q - 1)) / l(0);
    off += q;
  }
  return x;
}

}  // namespace cone

/// Nesterov-Todd scaling W (symmetric, W^2 z = s) with lambda = W z.
struct NTScaling {
  ConeSpec K;
  VectorXd w;                    // orthant: sqrt(s/z)
  std::vector<double> eta;       // per Lorentz cone
  std::vector<VectorXd> wbar;    // per Lorentz cone, hyperbolic unit vector
  VectorXd lambda;

  NTScaling() = default;

  NTScaling(const ConeSpec& cones, const VectorXd& s, const VectorXd& z) : K(cones) {
    w = (s.head(K.orthant).array() / z.head(K.orthant).array()).sqrt().matrix();
    int off = K.orthant;
    eta.reserve(K.soc.size());
    wbar.reserve(K.soc.size());
    for (int q : K.soc) {
      const auto ss = s.segment(off, q);
      const auto zz = z.segment(off, q);
      const double sres = std::max(cone::soc_residual(ss), 1e-300);
      const double zres = std::max(cone::soc_residual(zz), 1e-300);
      const VectorXd sb = ss / std::sqrt(sres);
      const VectorXd zb = zz / std::sqrt(zres);
      const double g = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
      VectorXd wb(q);
      wb(0) = (sb(0) + zb(0)) / (2.0 * g);
      wb.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * g);
      eta.push_back(std::pow(sres / zres, 0.25));
      wbar.push_back(std::move(wb));
      off += q;
    }
    lambda = apply(z);
  }

  VectorXd apply(const VectorXd& v) const { return apply_impl(v, false); }
  VectorXd apply_inverse(const VectorXd& v) const { return apply_impl(v, true); }

  /// Dense W^2 block of Lorentz cone k.
  Eigen::MatrixXd soc_w2(std::size_t k) const {
    const VectorXd& wb = wbar[k];
    const int q = static_cast<int>(wb.size());
    Eigen::MatrixXd M = 2.0 * wb * wb.transpose();
    M(0, 0) -= 1.0;
    for (int i = 1; i < q; ++i) M(i, i) += 1.0;
    return eta[k] * eta[k] * M;
  }

 private:
  VectorXd apply_impl(const VectorXd& v, bool inverse) const {
    VectorXd out(v.size());
    if (inverse)
      out.head(K.orthant) = v.head(K.orthant).cwiseQuotient(w);
    else
      out.head(K.orthant) = v.head(K.orthant).cwiseProduct(w);
    int off = K.orthant;
    for (std::size_t k = 0; k < K.soc.size(); ++k) {
      const int q = K.soc[k];
      const VectorXd& wb = wbar[k];
      const auto vv = v.segment(off, q);
      // The inverse flips the sign of the spatial part of wbar and divides by eta.
      const double sgn = inverse ? -1.0 : 1.0;
      const double scale = inverse ? 1.0 / eta[k] : eta[k];
      const auto w1 = wb.tail(q - 1);
      const double w1v1 = w1.dot(vv.tail(q - 1));
      out(off) = scale * (wb(0) * vv(0) + sgn * w1v1);
      out.segment(off + 1, q - 1) =
          scale * (sgn * vv(0) * w1 + vv.tail(q - 1) + (w1v1 / (1.0 + wb(0))) * w1);
      off += q;
    }
    return out;
  }
};

}  // namespace entry_cvx::socp

#endif
