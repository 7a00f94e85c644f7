#ifndef ENTRY_CVX_PLANNER_HPP
#define ENTRY_CVX_PLANNER_HPP

#include "entry_cvx/dynamics.hpp"
#include "entry_cvx/models.hpp"
#include "entry_cvx/socp/solver.hpp"
#include "entry_cvx/transcription.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace entry_cvx {

struct ScpConfig {
  int N = 200;
  Objective objective = Objective::MinVelocity;
  ObjectiveWeights weights;
  double delta_tol = 1e-4;
  double v_tol = 1e-5;
  int max_iterations = 50;
  double sigma0 = 0.0;        // rad
  double u_guess = -3.0;      // rad per unit nondimensional range
  double s_f_guess = 900e3;   // m
  int guess_substeps = 10;    // RK4 steps per node interval for the guess
  int validation_substeps = 20;
  TranscriptionOptions transcription;
  socp::SolverSettings solver = [] {
    socp::SolverSettings s;
    s.equilibrate = false;
    return s;
  }();

  void validate() const {
    if (N < 2) throw std::invalid_argument("scp config: N must be >= 2");
    if (!(delta_tol > 0 && v_tol > 0)) throw std::invalid_argument("scp config: thresholds must be positive");
    if (max_iterations < 1) throw std::invalid_argument("scp config: max_iterations must be >= 1");
    if (!(s_f_guess > 0)) throw std::invalid_argument("scp config: s_f_guess must be positive");
    const auto& w = weights;
    if (w.w_i < 0 || w.w_v < 0 || w.w_x < 0 || w.w_s < 0)
      throw std::invalid_argument("scp config: weights must be nonnegative");
  }
};

/// Boundary data at the interface (SI and degrees).
struct EntryScenario {
  double h0 = 125e3;
  double theta0 = -90.0;
  double phi0 = -45.0;
  double V0 = 5500.0;
  double gamma0 = -13.5;
  double psi0 = 85.0;
  double hf = 10e3;
  double thetaf = -70.0;
  double phif = -41.0;
  std::optional<double> tf;  // s

  Boundary nondimensional(const EntryModel& M, double sigma0) const {
    Boundary b;
    b.x0 << M.radius_from_altitude(h0), theta0 * kDegToRad, phi0 * kDegToRad, V0 / M.scale.V_s,
        gamma0 * kDegToRad, psi0 * kDegToRad, sigma0, 0.0;
    b.r_f = M.radius_from_altitude(hf);
    b.theta_f = thetaf * kDegToRad;
    b.phi_f = phif * kDegToRad;
    if (tf) b.tau_f = *tf / M.scale.t_s;
    return b;
  }
};

struct ObjectiveTerms {
  double wJ = 0;
  double wv = 0;
  double wx = 0;
  double ws = 0;
  double total() const { return wJ + wv + wx + ws; }
};

struct IterationRecord {
  int k = 0;
  ObjectiveTerms terms;
  double dx_l2 = 0;
  double v_l1 = 0;
  double s_f = 0;
  socp::Status solver_status = socp::Status::NumericalFailure;
  int solver_iterations = 0;
  double seconds = 0;
  bool objective_increased = false;
};

enum class Termination { Converged, NonConvergence, SubproblemFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::NonConvergence: return "non_convergence";
    case Termination::SubproblemFailure: return "subproblem_failure";
  }
  return "?";
}

struct ValidationReport {
  Vec8 terminal_deviation = Vec8::Zero();  // re-propagated minus optimized, nondimensional
  double altitude_deviation_m = 0;
  PathValues max_optimized{};
  PathValues max_propagated{};
  double max_node_error = 0;  // max over nodes of |x_prop - x_node|_inf
  double max_defect_rate = 0;  // max trapezoid defect / dS of the converged nodes
  Mat8X propagated;            // re-propagated states at the nodes
};

struct ScpResult {
  ReferenceTrajectory trajectory;
  Mat8X virtual_control;
  Eigen::VectorXd trust_radii;
  double trust_s = 0;
  std::vector<IterationRecord> history;
  Termination termination = Termination::NonConvergence;
  std::string message;
  ValidationReport validation;
  ObjectiveTerms final_terms;
  std::optional<socp::ConeProgram> failed_subproblem;  // set on SubproblemFailure
  double solve_seconds = 0;
  double total_seconds = 0;
};

inline bool convergence_check(const Eigen::VectorXd& dx, const Mat8X& v, double delta_tol, double v_tol) {
  return dx.norm() <= delta_tol && v.cwiseAbs().sum() <= v_tol;
}

inline ObjectiveTerms objective_decomposition(const ObjectiveWeights& w, const SubproblemPoint& pt) {
  return {w.w_i * pt.J_i, w.w_v * pt.v_l1, w.w_x * pt.dx_l2, w.w_s * pt.ds};
}

/// Constant-control propagation of the augmented range dynamics sampled at the nodes.
inline ReferenceTrajectory initial_guess(const ScpConfig& cfg, const Vec8& x0, const EntryModel& M) {
  cfg.validate();
  ReferenceTrajectory ref;
  const int N = cfg.N;
  const double sf = cfg.s_f_guess / M.planet.R0;
  ref.s_f = sf;
  ref.u = Eigen::VectorXd::Constant(N + 1, cfg.u_guess);
  ref.x.resize(8, N + 1);
  Vec8 x = x0;
  x(ix::sigma) = cfg.sigma0;
  x(ix::tau) = 0.0;
  ref.x.col(0) = x;
  const double dS = 1.0 / N;
  auto f = [&](double, const Vec8& s) { return rhs_augmented(M, s, cfg.u_guess, sf); };
  for (int k = 0; k < N; ++k) {
    const auto seg = propagate<Vec8>(f, x, k * dS, (k + 1) * dS, cfg.guess_substeps);
    x = seg.final_state();
    ref.x.col(k + 1) = x;
  }
  return ref;
}

/// Re-propagates the nonlinear augmented dynamics under piecewise-linear u(S).
inline Mat8X repropagate(const EntryModel& M, const ReferenceTrajectory& ref, int substeps) {
  const int N = ref.N();
  const double dS = ref.dS();
  Mat8X out(8, N + 1);
  Vec8 x = ref.x.col(0);
  out.col(0) = x;
  for (int k = 0; k < N; ++k) {
    const double u0 = ref.u(k), u1 = ref.u(k + 1), S0 = k * dS;
    auto f = [&](double S, const Vec8& s) {
      const double a = std::clamp((S - S0) / dS, 0.0, 1.0);
      return rhs_augmented(M, s, u0 + a * (u1 - u0), ref.s_f);
    };
    x = propagate<Vec8>(f, x, S0, S0 + dS, substeps).final_state();
    out.col(k + 1) = x;
  }
  return out;
}

inline ValidationReport validate(const ScpResult& result, const EntryModel& M, int substeps = 20) {
  const ReferenceTrajectory& ref = result.trajectory;
  ValidationReport rep;
  rep.propagated = repropagate(M, ref, substeps);
  const int N = ref.N();
  rep.terminal_deviation = rep.propagated.col(N) - ref.x.col(N);
  rep.altitude_deviation_m = rep.terminal_deviation(ix::r) * M.planet.R0;
  auto maxima = [&](const Mat8X& X) {
    PathValues m{0, 0, 0};
    for (int k = 0; k < X.cols(); ++k) {
      const PathValues p = path_values(M, X(ix::r, k), X(ix::V, k));
      m.Qdot = std::max(m.Qdot, p.Qdot);
      m.q = std::max(m.q, p.q);
      m.a = std::max(m.a, p.a);
    }
    return m;
  };
  rep.max_optimized = maxima(ref.x);
  // path maxima along the re-propagated path use a denser sampling than the nodes
  {
    PathValues m{0, 0, 0};
    const double dS = ref.dS();
    Vec8 x = ref.x.col(0);
    for (int k = 0; k < N; ++k) {
      const double u0 = ref.u(k), u1 = ref.u(k + 1), S0 = k * dS;
      auto f = [&](double S, const Vec8& s) {
        const double a = std::clamp((S - S0) / dS, 0.0, 1.0);
        return rhs_augmented(M, s, u0 + a * (u1 - u0), ref.s_f);
      };
      const auto seg = propagate<Vec8>(f, x, S0, S0 + dS, substeps);
      for (const Vec8& s : seg.x) {
        const PathValues p = path_values(M, s(ix::r), s(ix::V));
        m.Qdot = std::max(m.Qdot, p.Qdot);
        m.q = std::max(m.q, p.q);
        m.a = std::max(m.a, p.a);
      }
      x = seg.final_state();
    }
    rep.max_propagated = m;
  }
  rep.max_node_error = (rep.propagated - ref.x).cwiseAbs().maxCoeff();
  rep.max_defect_rate = trapezoid_defects(M, ref).cwiseAbs().maxCoeff();
  return rep;
}

class ScpPlanner {
 public:
  using Logger = std::function<void(const IterationRecord&)>;

  ScpPlanner(EntryModel model, StateBounds bounds, PathLimits limits, ScpConfig cfg)
      : M_(std::move(model)), bounds_(bounds), limits_(limits), cfg_(std::move(cfg)) {
    cfg_.validate();
    cfg_.transcription.weights = cfg_.weights;
    cfg_.transcription.objective = cfg_.objective;
    solver_ = std::make_unique<socp::InteriorPointSolver>(cfg_.solver);
  }

  /// Substitutes the conic back end (any socp::ConeSolver).
  void set_solver(std::unique_ptr<socp::ConeSolver> s) { solver_ = std::move(s); }
  void set_logger(Logger log) { log_ = std::move(log); }

  const EntryModel& model() const { return M_; }
  const ScpConfig& config() const { return cfg_; }

  SubproblemBuilder builder(const EntryScenario& sc) const {
    return SubproblemBuilder(M_, bounds_, limits_, sc.nondimensional(M_, cfg_.sigma0), cfg_.transcription);
  }

  ScpResult solve(const EntryScenario& scenario) const {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    const Boundary bc = scenario.nondimensional(M_, cfg_.sigma0);
    const SubproblemBuilder sb(M_, bounds_, limits_, bc, cfg_.transcription);

    ScpResult res;
    ReferenceTrajectory ref = initial_guess(cfg_, bc.x0, M_);
    double prev_total = std::numeric_limits<double>::infinity();
    double solve_time = 0;

    for (int k = 1; k <= cfg_.max_iterations; ++k) {
      const auto t0 = clock::now();
      const Subproblem sp = sb.build(ref);
      const socp::Solution sol = solver_->solve(sp.program);
      const double dt = std::chrono::duration<double>(clock::now() - t0).count();
      solve_time += dt;

      IterationRecord rec;
      rec.k = k;
      rec.solver_status = sol.status;
      rec.solver_iterations = sol.iterations;
      rec.seconds = dt;
      if (sol.status != socp::Status::Optimal) {
        res.history.push_back(rec);
        if (log_) log_(rec);
        res.termination = Termination::SubproblemFailure;
        res.failed_subproblem = sp.program;
        res.message = std::string("subproblem ") + std::to_string(k) + " ended with status " +
                      socp::to_string(sol.status);
        break;
      }
      const SubproblemPoint pt = sb.recover(sp, ref, sol.x);
      rec.terms = objective_decomposition(cfg_.weights, pt);
      rec.dx_l2 = pt.dx_l2;
      rec.v_l1 = pt.v_l1;
      rec.s_f = pt.traj.s_f;
      rec.objective_increased = rec.terms.total() > prev_total;
      prev_total = rec.terms.total();
      res.history.push_back(rec);
      if (log_) log_(rec);

      ref = pt.traj;
      res.trajectory = pt.traj;
      res.virtual_control = pt.v;
      res.trust_radii = pt.dx;
      res.trust_s = pt.ds;
      res.final_terms = rec.terms;
      if (convergence_check(pt.dx, pt.v, cfg_.delta_tol, cfg_.v_tol)) {
        res.termination = Termination::Converged;
        res.message = "converged in " + std::to_string(k) + " iterations";
        break;
      }
      if (k == cfg_.max_iterations) {
        res.termination = Termination::NonConvergence;
        res.message = "convergence criteria unmet after " + std::to_string(k) + " iterations";
      }
    }
    if (res.trajectory.x.cols() == 0) {
      res.trajectory = ref;
      res.virtual_control = Mat8X::Zero(8, ref.x.cols());
      res.trust_radii = Eigen::VectorXd::Zero(ref.x.cols());
    }
    res.solve_seconds = solve_time;
    res.validation = validate(res, M_, cfg_.validation_substeps);
    res.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return res;
  }

 private:
  EntryModel M_;
  StateBounds bounds_;
  PathLimits limits_;
  ScpConfig cfg_;
  std::unique_ptr<socp::ConeSolver> solver_;
  Logger log_;
};

}  // namespace entry_cvx

#endif
