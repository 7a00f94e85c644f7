#ifndef ENTRY_CVX_TRANSCRIPTION_HPP
#define ENTRY_CVX_TRANSCRIPTION_HPP

#include "entry_cvx/dynamics.hpp"
#include "entry_cvx/models.hpp"
#include "entry_cvx/socp/cone_program.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace entry_cvx {

using Mat8X = Eigen::Matrix<double, 8, Eigen::Dynamic>;

/// The SCP iterate: N+1 augmented states, N+1 controls u = dsigma/ds and the final range.
struct ReferenceTrajectory {
  Mat8X x;
  Eigen::VectorXd u;
  double s_f = 0.0;

  int N() const { return static_cast<int>(x.cols()) - 1; }
  double dS() const { return 1.0 / N(); }

  void validate() const {
    if (x.cols() < 3) throw std::invalid_argument("reference trajectory needs N >= 2");
    if (u.size() != x.cols()) throw std::invalid_argument("reference trajectory: control count != node count");
    if (!(s_f > 0)) throw std::invalid_argument("reference trajectory: s_f must be positive");
  }
};

struct LinearizedNode {
  Mat8 A;
  Vec8 B;
  Vec8 c;
  Vec8 d;
};

enum class Objective { MaxAltitude, MinVelocity, MinTime };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::MaxAltitude: return "max-altitude";
    case Objective::MinVelocity: return "min-velocity";
    case Objective::MinTime: return "min-time";
  }
  return "?";
}

inline Objective objective_from_string(const std::string& s) {
  if (s == "max-altitude" || s == "J1") return Objective::MaxAltitude;
  if (s == "min-velocity" || s == "J2") return Objective::MinVelocity;
  if (s == "min-time" || s == "J3") return Objective::MinTime;
  throw std::invalid_argument("unknown objective '" + s + "' (expected max-altitude, min-velocity or min-time)");
}

/// Terminal selector on the 8 augmented states; bank angle and time are never selected.
inline Eigen::Matrix<double, 8, 1> terminal_selector(Objective o) {
  Eigen::Matrix<double, 8, 1> e = Eigen::Matrix<double, 8, 1>::Zero();
  e(ix::theta) = 1;
  e(ix::phi) = 1;
  if (o != Objective::MaxAltitude) e(ix::r) = 1;
  return e;
}

/// Analytic Jacobian of the rotation-free augmented dynamics.
template <typename Derived>
Mat8 jacobian_f(const EntryModel& M, const Eigen::MatrixBase<Derived>& x) {
  const double r = x(ix::r), phi = x(ix::phi), V = x(ix::V), g = x(ix::gamma), psi = x(ix::psi),
               sig = x(ix::sigma);
  detail::check_domain(r, phi, V, g);
  const auto ad = M.aero(r, V);
  const double beta = M.planet.R0 / M.planet.h_s;
  const double cg = std::cos(g), sg = std::sin(g), tg = std::tan(g);
  const double cp = std::cos(phi), tp = std::tan(phi);
  const double cs = std::cos(psi), ss = std::sin(psi);
  const double cb = std::cos(sig), sb = std::sin(sig);
  const double r2 = r * r, r3 = r2 * r, V2 = V * V;
  const double lv = ad.L / V2;  // independent of V

  Mat8 J = Mat8::Zero();
  J(ix::r, ix::gamma) = 1.0 / (cg * cg);

  const double f1 = ss / (r * cp);
  J(ix::theta, ix::r) = -f1 / r;
  J(ix::theta, ix::phi) = f1 * tp;
  J(ix::theta, ix::psi) = cs / (r * cp);

  J(ix::phi, ix::r) = -cs / r2;
  J(ix::phi, ix::psi) = -ss / r;

  J(ix::V, ix::r) = beta * ad.D / (V * cg) + 2.0 * tg / (r3 * V);
  J(ix::V, ix::V) = -ad.D / (V2 * cg) + tg / (r2 * V2);
  J(ix::V, ix::gamma) = -ad.D * sg / (V * cg * cg) - 1.0 / (cg * cg * r2 * V);

  J(ix::gamma, ix::r) = -beta * lv * cb / cg + 2.0 / (r3 * V2) - 1.0 / r2;
  J(ix::gamma, ix::V) = 2.0 / (r2 * V2 * V);
  J(ix::gamma, ix::gamma) = lv * cb * sg / (cg * cg);
  J(ix::gamma, ix::sigma) = -lv * sb / cg;

  J(ix::psi, ix::r) = -beta * lv * sb / (cg * cg) - ss * tp / r2;
  J(ix::psi, ix::phi) = ss / (r * cp * cp);
  J(ix::psi, ix::gamma) = 2.0 * lv * sb * sg / (cg * cg * cg);
  J(ix::psi, ix::psi) = cs * tp / r;
  J(ix::psi, ix::sigma) = lv * cb / (cg * cg);

  J(ix::tau, ix::V) = -1.0 / (V2 * cg);
  J(ix::tau, ix::gamma) = sg / (V * cg * cg);
  return J;
}

/// First-order model about (x_ref, u_ref, s_f_ref); the Jacobian of the rotation
/// terms is left out, rotation enters only through c.
template <typename Derived>
LinearizedNode linearize_node(const EntryModel& M, const Eigen::MatrixBase<Derived>& x_ref, double u_ref,
                              double s_f_ref) {
  LinearizedNode n;
  const Mat8 J = jacobian_f(M, x_ref);
  const Vec8 b0 = bank_selector();
  n.A = s_f_ref * J;
  n.B = s_f_ref * b0;
  n.c = f_augmented(M, x_ref) + b0 * u_ref + f_rotation_augmented(M, x_ref);
  n.d = -n.A * x_ref - s_f_ref * b0 * u_ref;
  return n;
}

/// One affine inequality  value + d_r (r - r_ref) + d_V (V - V_ref) <= limit  per load.
struct PathRow {
  Eigen::Vector3d value;
  Eigen::Vector3d d_r;
  Eigen::Vector3d d_V;
  double r_ref = 0;
  double V_ref = 0;

  Eigen::Vector3d evaluate(double r, double V) const { return value + d_r * (r - r_ref) + d_V * (V - V_ref); }
};

inline std::vector<PathRow> linearize_path(const EntryModel& M, const Mat8X& x_ref) {
  std::vector<PathRow> rows;
  rows.reserve(x_ref.cols());
  for (int n = 0; n < x_ref.cols(); ++n) {
    const auto g = path_gradients(M, x_ref(ix::r, n), x_ref(ix::V, n));
    rows.push_back({g.value.as_vector(), g.d_r, g.d_V, x_ref(ix::r, n), x_ref(ix::V, n)});
  }
  return rows;
}

/// Trapezoidal row for interval [n, n+1]:
///   H0 x_n + H1 x_{n+1} + h(B_n u_n + B_{n+1} u_{n+1}) + h(v_n + v_{n+1}) + G s_f = rhs,  h = dS/2.
struct TrapezoidBlocks {
  Mat8 H0;
  Mat8 H1;
  Vec8 Bu0;
  Vec8 Bu1;
  double v_coef = 0;
  Vec8 G;
  Vec8 rhs;
};

inline TrapezoidBlocks trapezoid_blocks(const LinearizedNode& a, const LinearizedNode& b, double dS) {
  const double h = 0.5 * dS;
  TrapezoidBlocks t;
  t.H0 = Mat8::Identity() + h * a.A;
  t.H1 = -(Mat8::Identity() - h * b.A);
  t.Bu0 = h * a.B;
  t.Bu1 = h * b.B;
  t.v_coef = h;
  t.G = h * (a.c + b.c);
  t.rhs = -h * (a.d + b.d);
  return t;
}

/// Relaxed bank-rate bound: |u| <= sigma_dot_max * t_s / V_max (nondimensional).
inline double relaxed_rate_bound(const StateBounds& b, const Scaling& sc) {
  if (!(b.V_max > 0)) throw std::invalid_argument("relaxed_rate_bound: V_max must be positive");
  return b.sigma_rate_max * kDegToRad * sc.t_s / (b.V_max / sc.V_s);
}

struct ObjectiveWeights {
  double w_i = 20.0;
  double w_v = 5e5;
  double w_x = 0.1;
  double w_s = 0.1;
};

/// Boundary data in nondimensional units.
struct Boundary {
  Vec8 x0;                     // full augmented initial state (sigma_0, tau_0 included)
  double r_f = 0, theta_f = 0, phi_f = 0;
  std::optional<double> tau_f;  // fixed final time when set
};

struct TranscriptionOptions {
  Objective objective = Objective::MinVelocity;
  ObjectiveWeights weights;
  bool path_constraints = true;
  bool box_bounds = true;
  bool raise_ceiling_to_entry = true;
  double trust_cap = 0.2;  // <= 0 disables the hard cap on per-node radii
  bool sigma0_free = false;
};

/// Offsets of every block of the subproblem decision vector.  States, controls and
/// s_f are carried as scaled deviations from the reference:
///   x_n = x_n^k + diag(state_scale) z_n,  u_n = u_scale w_n,  s_f = s_f^k + sf_scale w_s.
struct Layout {
  int N = 0;
  int z = 0, w = 0, v = 0, sf = 0, zeta = 0, dx = 0, ds = 0, t = 0, n = 0;

  explicit Layout(int N_ = 0) : N(N_) {
    const int K = N + 1;
    z = 0;
    w = z + 8 * K;
    v = w + K;
    sf = v + 8 * K;
    zeta = sf + 1;
    dx = zeta + 8 * K;
    ds = dx + K;
    t = ds + 1;
    n = t + 1;
  }
  /// Size of the core vector [x; u; v; s_f].
  int core_dim() const { return 17 * (N + 1) + 1; }
  int dynamics_rows() const { return 8 * (N + 1); }
};

inline Vec8 default_state_scale() {
  Vec8 d;
  d << 1e-3, 1e-2, 1e-2, 0.05, 0.05, 0.05, 0.5, 0.02;
  return d;
}

/// Assembled convex subproblem about a reference trajectory.
struct Subproblem {
  socp::ConeProgram program;
  Layout layout;
  std::vector<LinearizedNode> nodes;
  std::vector<PathRow> path;
  Vec8 state_scale;
  double u_scale = 1.0;
  double sf_scale = 0.01;
  double objective_constant = 0.0;  // w_i J_i at z = 0 part not carried by c
  int terminal_rows = 0;
  int orthant_rows = 0;
};

/// Recovered primal quantities of a solved subproblem.
struct SubproblemPoint {
  ReferenceTrajectory traj;
  Mat8X v;
  Eigen::VectorXd dx;
  double ds = 0;
  double J_i = 0;
  double v_l1 = 0;
  double dx_l2 = 0;
};

class SubproblemBuilder {
 public:
  SubproblemBuilder(const EntryModel& M, const StateBounds& bounds, const PathLimits& limits,
                    const Boundary& bc, const TranscriptionOptions& opt)
      : M_(M), bounds_(bounds), limits_(limits), bc_(bc), opt_(opt) {
    bounds_.validate();
    limits_.validate();
    u_max_ = relaxed_rate_bound(bounds_, M_.scale);
  }

  double u_max() const { return u_max_; }

  Subproblem build(const ReferenceTrajectory& ref) const {
    ref.validate();
    const int N = ref.N();
    const int K = N + 1;
    const double dS = ref.dS();
    Subproblem sp;
    sp.layout = Layout(N);
    const Layout& L = sp.layout;
    sp.state_scale = default_state_scale();
    sp.u_scale = u_max_;
    const Vec8& D = sp.state_scale;
    const double us = sp.u_scale, ss = sp.sf_scale;

    sp.nodes.reserve(K);
    for (int k = 0; k < K; ++k) sp.nodes.push_back(linearize_node(M_, ref.x.col(k), ref.u(k), ref.s_f));

    std::vector<socp::Triplet> At, Gt;
    std::vector<double> b, h;

    // initial condition
    int row = 0;
    for (int i = 0; i < 8; ++i) {
      if (opt_.sigma0_free && i == ix::sigma) continue;
      At.emplace_back(row, L.z + i, 1.0);
      b.push_back((bc_.x0(i) - ref.x(i, 0)) / D(i));
      ++row;
    }
    // trapezoidal rows, each divided by the state scale of its component
    for (int k = 0; k < N; ++k) {
      const TrapezoidBlocks tb = trapezoid_blocks(sp.nodes[k], sp.nodes[k + 1], dS);
      const Vec8 rhs = tb.rhs - tb.H0 * ref.x.col(k) - tb.H1 * ref.x.col(k + 1) - tb.G * ref.s_f;
      for (int i = 0; i < 8; ++i) {
        const double inv = 1.0 / D(i);
        for (int j = 0; j < 8; ++j) {
          if (tb.H0(i, j) != 0.0) At.emplace_back(row, L.z + 8 * k + j, tb.H0(i, j) * D(j) * inv);
          if (tb.H1(i, j) != 0.0) At.emplace_back(row, L.z + 8 * (k + 1) + j, tb.H1(i, j) * D(j) * inv);
        }
        if (tb.Bu0(i) != 0.0) At.emplace_back(row, L.w + k, tb.Bu0(i) * us * inv);
        if (tb.Bu1(i) != 0.0) At.emplace_back(row, L.w + k + 1, tb.Bu1(i) * us * inv);
        At.emplace_back(row, L.v + 8 * k + i, tb.v_coef * inv);
        At.emplace_back(row, L.v + 8 * (k + 1) + i, tb.v_coef * inv);
        At.emplace_back(row, L.sf, tb.G(i) * ss * inv);
        b.push_back(rhs(i) * inv);
        ++row;
      }
    }
    // terminal rows
    const int first_terminal = row;
    const Vec8 target = target_vector();
    const Eigen::Matrix<double, 8, 1> E = terminal_selector(opt_.objective);
    for (int i = 0; i < 8; ++i) {
      if (E(i) == 0.0) continue;
      At.emplace_back(row, L.z + 8 * N + i, 1.0);
      b.push_back((target(i) - ref.x(i, N)) / D(i));
      ++row;
    }
    if (bc_.tau_f) {
      At.emplace_back(row, L.z + 8 * N + ix::tau, 1.0);
      b.push_back((*bc_.tau_f - ref.x(ix::tau, N)) / D(ix::tau));
      ++row;
    }
    sp.terminal_rows = row - first_terminal;
    const int p = row;

    // ---- orthant rows (a'y <= beta) ----
    row = 0;
    auto leq = [&](std::initializer_list<std::pair<int, double>> terms, double beta) {
      for (const auto& [col, val] : terms)
        if (val != 0.0) Gt.emplace_back(row, col, val);
      h.push_back(beta);
      ++row;
    };
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < 8; ++i) {
        const int vi = L.v + 8 * k + i, zi = L.zeta + 8 * k + i;
        leq({{vi, 1.0}, {zi, -1.0}}, 0.0);
        leq({{vi, -1.0}, {zi, -1.0}}, 0.0);
      }
    if (opt_.path_constraints) {
      sp.path = linearize_path(M_, ref.x);
      const Eigen::Vector3d fmax = limits_.as_vector();
      for (int k = 0; k < K; ++k) {
        const PathRow& pr = sp.path[k];
        for (int i = 0; i < 3; ++i)
          leq({{L.z + 8 * k + ix::r, pr.d_r(i) * D(ix::r) / fmax(i)}, {L.z + 8 * k + ix::V, pr.d_V(i) * D(ix::V) / fmax(i)}},
              1.0 - pr.value(i) / fmax(i));
      }
    }
    const double sig_max = bounds_.sigma_max * kDegToRad;
    for (int k = 0; k < K; ++k) {
      const int zs = L.z + 8 * k + ix::sigma;
      leq({{zs, D(ix::sigma)}}, sig_max - ref.x(ix::sigma, k));
      leq({{zs, -D(ix::sigma)}}, sig_max + ref.x(ix::sigma, k));
      leq({{L.w + k, us}}, u_max_);
      leq({{L.w + k, -us}}, u_max_);
    }
    if (opt_.box_bounds) {
      const Vec8 lo = box_lower(), hi = box_upper();
      for (int k = 1; k < K; ++k)
        for (int i : {ix::r, ix::theta, ix::phi, ix::V, ix::gamma, ix::psi}) {
          const int zi = L.z + 8 * k + i;
          leq({{zi, D(i)}}, hi(i) - ref.x(i, k));
          leq({{zi, -D(i)}}, ref.x(i, k) - lo(i));
        }
    }
    const double smin = bounds_.s_min / M_.planet.R0, smax = bounds_.s_max / M_.planet.R0;
    leq({{L.sf, ss}}, smax - ref.s_f);
    leq({{L.sf, -ss}}, ref.s_f - smin);
    leq({{L.sf, ss}, {L.ds, -1.0}}, 0.0);
    leq({{L.sf, -ss}, {L.ds, -1.0}}, 0.0);
    if (opt_.trust_cap > 0)
      for (int k = 0; k < K; ++k) leq({{L.dx + k, 1.0}}, opt_.trust_cap);
    sp.orthant_rows = row;

    // ---- Lorentz cones ----
    std::vector<int> soc;
    for (int k = 0; k < K; ++k) {
      Gt.emplace_back(row, L.dx + k, -1.0);
      h.push_back(0.0);
      ++row;
      for (int i = 0; i < 8; ++i) {
        Gt.emplace_back(row, L.z + 8 * k + i, -D(i));
        h.push_back(0.0);
        ++row;
      }
      soc.push_back(9);
    }
    Gt.emplace_back(row, L.t, -1.0);
    h.push_back(0.0);
    ++row;
    for (int k = 0; k < K; ++k) {
      Gt.emplace_back(row, L.dx + k, -1.0);
      h.push_back(0.0);
      ++row;
    }
    soc.push_back(K + 1);

    socp::ConeProgram& P = sp.program;
    P.c = Eigen::VectorXd::Zero(L.n);
    const ObjectiveWeights& w = opt_.weights;
    switch (opt_.objective) {
      case Objective::MaxAltitude:
        P.c(L.z + 8 * N + ix::r) = -w.w_i * D(ix::r);
        sp.objective_constant = -w.w_i * ref.x(ix::r, N);
        break;
      case Objective::MinVelocity:
        P.c(L.z + 8 * N + ix::V) = w.w_i * D(ix::V);
        sp.objective_constant = w.w_i * ref.x(ix::V, N);
        break;
      case Objective::MinTime:
        P.c(L.z + 8 * N + ix::tau) = w.w_i * D(ix::tau);
        sp.objective_constant = w.w_i * ref.x(ix::tau, N);
        break;
    }
    P.c.segment(L.zeta, 8 * K).setConstant(w.w_v);
    P.c(L.t) = w.w_x;
    P.c(L.ds) = w.w_s;

    P.A.resize(p, L.n);
    P.A.setFromTriplets(At.begin(), At.end());
    P.b = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    P.G.resize(row, L.n);
    P.G.setFromTriplets(Gt.begin(), Gt.end());
    P.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    P.cones.orthant = sp.orthant_rows;
    P.cones.soc = std::move(soc);
    return sp;
  }

  /// Maps a subproblem primal vector back to trajectory space.
  SubproblemPoint recover(const Subproblem& sp, const ReferenceTrajectory& ref, const Eigen::VectorXd& y) const {
    const Layout& L = sp.layout;
    const int K = L.N + 1;
    SubproblemPoint pt;
    pt.traj.x = ref.x;
    for (int k = 0; k < K; ++k)
      pt.traj.x.col(k) += sp.state_scale.cwiseProduct(y.segment(L.z + 8 * k, 8));
    pt.traj.u = sp.u_scale * y.segment(L.w, K);
    pt.traj.s_f = ref.s_f + sp.sf_scale * y(L.sf);
    pt.v = Eigen::Map<const Mat8X>(y.data() + L.v, 8, K);
    pt.dx = y.segment(L.dx, K);
    pt.ds = y(L.ds);
    pt.v_l1 = pt.v.cwiseAbs().sum();
    pt.dx_l2 = pt.dx.norm();
    const Vec8 xf = pt.traj.x.col(L.N);
    switch (opt_.objective) {
      case Objective::MaxAltitude: pt.J_i = -xf(ix::r); break;
      case Objective::MinVelocity: pt.J_i = xf(ix::V); break;
      case Objective::MinTime: pt.J_i = xf(ix::tau); break;
    }
    return pt;
  }

  Vec8 box_lower() const {
    Vec8 lo = Vec8::Constant(-1e20);
    lo(ix::r) = M_.radius_from_altitude(bounds_.h_min);
    lo(ix::theta) = bounds_.theta_min * kDegToRad;
    lo(ix::phi) = bounds_.phi_min * kDegToRad;
    lo(ix::V) = bounds_.V_min / M_.scale.V_s;
    lo(ix::gamma) = bounds_.gamma_min * kDegToRad;
    lo(ix::psi) = bounds_.psi_min * kDegToRad;
    return lo;
  }

  Vec8 box_upper() const {
    Vec8 hi = Vec8::Constant(1e20);
    double h_top = bounds_.h_max;
    if (opt_.raise_ceiling_to_entry) h_top = std::max(h_top, M_.altitude_m(bc_.x0(ix::r)));
    hi(ix::r) = M_.radius_from_altitude(h_top);
    hi(ix::theta) = bounds_.theta_max * kDegToRad;
    hi(ix::phi) = bounds_.phi_max * kDegToRad;
    hi(ix::V) = bounds_.V_max / M_.scale.V_s;
    hi(ix::gamma) = bounds_.gamma_max * kDegToRad;
    hi(ix::psi) = bounds_.psi_max * kDegToRad;
    return hi;
  }

 private:
  Vec8 target_vector() const {
    Vec8 t = Vec8::Zero();
    t(ix::r) = bc_.r_f;
    t(ix::theta) = bc_.theta_f;
    t(ix::phi) = bc_.phi_f;
    return t;
  }

  const EntryModel& M_;
  StateBounds bounds_;
  PathLimits limits_;
  Boundary bc_;
  TranscriptionOptions opt_;
  double u_max_ = 0;
};

/// Per-interval trapezoid defects of the nonlinear augmented dynamics divided by dS,
/// i.e. the virtual-control rate needed to make the nodes consistent.
inline Mat8X trapezoid_defects(const EntryModel& M, const ReferenceTrajectory& ref) {
  const int N = ref.N();
  const double dS = ref.dS();
  Mat8X d(8, N);
  Vec8 fa = rhs_augmented(M, ref.x.col(0), ref.u(0), ref.s_f);
  for (int k = 0; k < N; ++k) {
    const Vec8 fb = rhs_augmented(M, ref.x.col(k + 1), ref.u(k + 1), ref.s_f);
    d.col(k) = (ref.x.col(k + 1) - ref.x.col(k) - 0.5 * dS * (fa + fb)) / dS;
    fa = fb;
  }
  return d;
}

}  // namespace entry_cvx

#endif
