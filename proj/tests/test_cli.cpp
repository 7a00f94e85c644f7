#include "entry_cvx/cli/commands.hpp"
#include "entry_cvx/cli/config.hpp"
#include "entry_cvx/cli/output.hpp"
#include "entry_cvx/cli/studies.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace entry_cvx;
using namespace entry_cvx::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("entry_cvx_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

RunConfig small_plan(const std::string& dir, int N = 40) {
  RunConfig c;
  c.scp.N = N;
  c.out_dir = dir;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.scp.N = 77;
  c.scp.objective = Objective::MinTime;
  c.final_time.kind = FinalTime::Kind::Fixed;
  c.final_time.seconds = 301.25;
  c.propagate.bank.table_deg = {{0.0, -60.0}, {100.0, -20.0}};
  c.propagate.duration_s = 12.5;
  c.bounds.h_max = 1.0 / 3.0;
  c.scp.sigma0 = 0.1;
  const json j = to_json(c);
  const RunConfig back = apply_config(RunConfig{}, j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.bounds.h_max, 1.0 / 3.0);
  EXPECT_EQ(back.propagate.bank.table_deg, c.propagate.bank.table_deg);
  EXPECT_EQ(parse_config(j.dump()).scp.N, 77);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"nodes": 50, "node_count": 3})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"nodes": "many"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"objective": "fastest"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"final_time": "soon"})"), ConfigError);
  EXPECT_THROW(parse_config(R"([1, 2])"), ConfigError);
  EXPECT_THROW(parse_config(R"({"nodes": 1})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"bank_table": [[0, 1], [0, 2]]})"), std::invalid_argument);
}

TEST(Config, FinalTimeResolution) {
  RunConfig c;
  c.scp.objective = Objective::MinVelocity;
  EXPECT_EQ(c.resolved_scenario().tf, std::optional<double>(355.0));
  c.scp.objective = Objective::MaxAltitude;
  EXPECT_EQ(c.resolved_scenario().tf, std::optional<double>(355.0));
  c.scp.objective = Objective::MinTime;
  EXPECT_FALSE(c.resolved_scenario().tf.has_value());
  c.final_time.kind = FinalTime::Kind::Fixed;
  c.final_time.seconds = 340.0;
  EXPECT_EQ(c.resolved_scenario().tf, std::optional<double>(340.0));
  c.final_time.kind = FinalTime::Kind::Free;
  c.scp.objective = Objective::MinVelocity;
  EXPECT_FALSE(c.resolved_scenario().tf.has_value());
}

TEST(Csv, TableRoundTripIsExact) {
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0 / 3.0, -2.5e-300}, {6.02214076e23, 0.1 + 0.2}};
  std::stringstream ss;
  write_csv(ss, t);
  const CsvTable back = read_csv(ss);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(Csv, TrajectoryRoundTrip) {
  const EntryModel M;
  ScpConfig cfg;
  cfg.N = 30;
  const ReferenceTrajectory ref = initial_guess(cfg, EntryScenario{}.nondimensional(M, 0.0).x0, M);
  std::stringstream ss;
  write_csv(ss, trajectory_table(M, ref));
  const ReferenceTrajectory back = trajectory_from_table(M, read_csv(ss));
  ASSERT_EQ(back.x.cols(), ref.x.cols());
  EXPECT_LT((back.x - ref.x).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((back.u - ref.u).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(back.s_f, ref.s_f, 1e-15);
}

TEST(Json, HistoryAndComparisonRoundTrip) {
  const EntryModel M;
  IterationRecord r;
  r.k = 3;
  r.terms = {0.1, 2.0 / 3.0, 1e-9, 0.0};
  r.dx_l2 = 0.125;
  r.v_l1 = 3e-7;
  r.s_f = 0.27;
  r.solver_status = socp::Status::Optimal;
  r.solver_iterations = 24;
  r.objective_increased = true;
  ScpResult res;
  res.history = {r};
  ScpConfig cfg;
  cfg.N = 10;
  res.trajectory = initial_guess(cfg, EntryScenario{}.nondimensional(M, 0.0).x0, M);
  const json j = json::parse(dump_json(history_json(res, M, Objective::MinVelocity)));
  const auto back = history_from_json(j, M);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].k, 3);
  EXPECT_EQ(back[0].terms.wv, r.terms.wv);
  EXPECT_EQ(back[0].dx_l2, r.dx_l2);
  EXPECT_NEAR(back[0].s_f, r.s_f, 1e-16);
  EXPECT_EQ(back[0].solver_status, r.solver_status);
  EXPECT_TRUE(back[0].objective_increased);

  IvarComparison c;
  c.time.h_m = 16232.04;
  c.energy.theta_deg = -71.9794;
  c.altitude_gap_m = 1.0 / 7.0;
  c.steps_energy = 400000;
  const IvarComparison cb = comparison_from_json(json::parse(dump_json(to_json(c))));
  EXPECT_EQ(cb.time.h_m, c.time.h_m);
  EXPECT_EQ(cb.energy.theta_deg, c.energy.theta_deg);
  EXPECT_EQ(cb.altitude_gap_m, c.altitude_gap_m);
  EXPECT_EQ(cb.steps_energy, 400000);
}

TEST(Studies, BankTableInterpolation) {
  BankProfile b;
  b.table_deg = {{0.0, -60.0}, {10.0, -40.0}};
  EXPECT_DOUBLE_EQ(b.at(-5.0), -60.0 * kDegToRad);
  EXPECT_DOUBLE_EQ(b.at(5.0), -50.0 * kDegToRad);
  EXPECT_DOUBLE_EQ(b.at(50.0), -40.0 * kDegToRad);
}

TEST(Studies, ZeroSpanReturnsInput) {
  const EntryModel M;
  const Track x0 = entry_track(M, 125e3, -90, -45, 5500, -13.5, 85);
  for (IvarMode m : {IvarMode::Time, IvarMode::Energy, IvarMode::Range}) {
    const auto pr = propagate_track(M, m, x0, 0.0, 100, BankProfile{});
    ASSERT_EQ(pr.x.size(), 1u);
    EXPECT_EQ(pr.final_state(), x0);
  }
  RunConfig c;
  c.out_dir = scratch_dir("zero_span").string();
  c.propagate.duration_s = 0.0;
  std::ostringstream log;
  EXPECT_EQ(cmd_propagate(c, log), 0);
  const CsvTable t = read_csv_file((std::filesystem::path(c.out_dir) / "propagation.csv").string());
  ASSERT_EQ(t.rows.size(), 1u);
  const Track back = track_from_row(M, t, 0);
  EXPECT_LT((back - x0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Studies, RangeAndTimeParameterizationsAgree) {
  const EntryModel M;
  const Track x0 = entry_track(M, 125e3, -90, -45, 5500, -13.5, 85);
  CompareSettings cs;
  cs.steps_energy = 2000;
  const IvarComparison c = compare_ivar(M, x0, BankProfile{}, cs);
  EXPECT_NEAR(c.time.h_m, 16232.04, 1e-3);
  EXPECT_LT(std::abs(c.range_vs_time_altitude_m), 0.5);
  EXPECT_LT(std::abs(c.range_vs_time_longitude_m), 0.5);
  EXPECT_LT(std::abs(c.range_vs_time_latitude_m), 0.5);
  EXPECT_NEAR(c.range.t_s, c.time.t_s, 1e-3);
}

TEST(Studies, EnergyParameterizationExactWithoutRotation) {
  PlanetModel p;
  p.omega_dim = 0.0;
  const EntryModel M(p, VehicleModel{});
  const Track x0 = entry_track(M, 125e3, -90, -45, 5500, -13.5, 85);
  CompareSettings cs;
  cs.steps_time = 20000;
  cs.steps_energy = 800000;
  const IvarComparison c = compare_ivar(M, x0, BankProfile{}, cs);
  EXPECT_LT(std::abs(c.altitude_gap_m), 0.01);
  EXPECT_LT(std::abs(c.longitude_gap_m), 0.05);
  EXPECT_LT(std::abs(c.latitude_gap_m), 0.05);
}

TEST(Commands, PlanWritesReproducibleFiles) {
  const auto d1 = scratch_dir("plan_a"), d2 = scratch_dir("plan_b");
  std::ostringstream log;
  ASSERT_EQ(cmd_plan(small_plan(d1.string()), log), 0) << log.str();
  ASSERT_EQ(cmd_plan(small_plan(d2.string()), log), 0);
  for (const char* f : {"trajectory.csv", "history.json", "objective.csv", "plot_altitude.csv", "plot_ground_track.csv",
                        "plot_bank.csv", "plot_path.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(d1 / f)) << f;
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(d1 / "error.json"));
  const json h = json::parse(slurp(d1 / "history.json"));
  EXPECT_EQ(h["summary"]["termination"], "converged");
  // the written config reproduces the run configuration
  const RunConfig again = load_config((d1 / "config.json").string());
  EXPECT_EQ(to_json(again), to_json(small_plan(d1.string())));
}

TEST(Commands, PlanReportsNonConvergence) {
  const auto d = scratch_dir("plan_cap");
  RunConfig c = small_plan(d.string(), 20);
  c.scp.max_iterations = 1;
  std::ostringstream log;
  EXPECT_EQ(cmd_plan(c, log), 1);
  const json e = json::parse(slurp(d / "error.json"));
  EXPECT_EQ(e["error"], "non_convergence");
  EXPECT_FALSE(e["message"].get<std::string>().empty());
}

TEST(Commands, DumpProblemReadsBack) {
  const auto d = scratch_dir("dump");
  RunConfig c = small_plan(d.string(), 10);
  std::ostringstream log;
  ASSERT_EQ(cmd_dump_problem(c, log), 0);
  const socp::ConeProgram p = socp::read_problem_file((d / "problem.txt").string());
  EXPECT_EQ(p.n(), 26 * 11 + 3);
  EXPECT_NO_THROW(p.validate());
}
