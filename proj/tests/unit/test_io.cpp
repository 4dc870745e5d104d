#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "parcell/config.hpp"
#include "parcell/csv_io.hpp"
#include "parcell/errors.hpp"
#include "parcell/scenario.hpp"

using namespace parcell;
using namespace parcell::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = PARCELL_SCENARIO_DIR;

std::string expect_config_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError";
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parcell_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(DriveCycleCsv, ParsesAndRoundTrips) {
  std::istringstream in("t_s,i_a\n0,0\n1,2.5\n2,-3.125\n\n");
  const DriveCycle c = parse_drive_cycle(in);
  ASSERT_EQ(c.samples().size(), 3u);
  EXPECT_EQ(c.samples()[2].i, -3.125);
  std::ostringstream out;
  write_drive_cycle(c, out);
  std::istringstream back(out.str());
  const DriveCycle d = parse_drive_cycle(back);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(d.samples()[k].i, c.samples()[k].i);
}

TEST(DriveCycleCsv, ColumnOrderDoesNotMatter) {
  std::istringstream in("i_a,t_s\n1.5,0\n2.5,1\n");
  const DriveCycle c = parse_drive_cycle(in);
  EXPECT_EQ(c.samples()[1].t, 1.0);
  EXPECT_EQ(c.samples()[1].i, 2.5);
}

TEST(DriveCycleCsv, DiagnosticsNameLineAndColumn) {
  std::istringstream missing("time,i_a\n0,1\n");
  EXPECT_NE(expect_config_error([&] { parse_drive_cycle(missing, "c.csv"); }).find("c.csv:1: missing header column 't_s'"),
            std::string::npos);
  std::istringstream bad("t_s,i_a\n0,1\n1,abc\n");
  EXPECT_NE(expect_config_error([&] { parse_drive_cycle(bad, "c.csv"); }).find("c.csv:3"), std::string::npos);
  std::istringstream back("t_s,i_a\n0,1\n2,1\n1,1\n");
  EXPECT_NE(expect_config_error([&] { parse_drive_cycle(back, "c.csv"); }).find("c.csv:4: timestamps"),
            std::string::npos);
  std::istringstream short_row("t_s,i_a\n0\n");
  EXPECT_NE(expect_config_error([&] { parse_drive_cycle(short_row, "c.csv"); }).find("missing value"),
            std::string::npos);
  EXPECT_THROW(load_drive_cycle("/nonexistent/cycle.csv"), Error);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const PackModel m = reference_model();
  const Trajectory t = simulate(m, state2(0.4, 0.0, 0.5, 0.0), synth_udds_like(20.0, 30.0, 3), 0.1, 30.0);
  std::ostringstream out;
  write_trajectory(t, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t_s,z_1,z_2,vc_1,vc_2,i_1,i_2,v_terminal");
  std::istringstream in(out.str());
  const Trajectory back = parse_trajectory(in);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(back.times[k], t.times[k]);
    EXPECT_EQ(back.states[k].x, t.states[k].x);
    EXPECT_EQ(back.states[k].u, t.states[k].u);
    EXPECT_EQ(back.terminal_voltage[k], t.terminal_voltage[k]);
  }
  std::ostringstream again;
  write_trajectory(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(TrajectoryCsv, MissingColumnIsReported) {
  std::istringstream in("t_s,z_1,z_2,vc_1,vc_2,i_1,i_2\n0,0.5,0.5,0,0,1,1\n");
  EXPECT_NE(expect_config_error([&] { parse_trajectory(in, "t.csv"); }).find("'v_terminal'"), std::string::npos);
}

TEST(EstimatesCsv, RoundTripIsExact) {
  const PackModel m = reference_model();
  const Trajectory t = simulate(m, state2(0.4, 0.0, 0.5, 0.0), synth_udds_like(20.0, 10.0, 3), 0.1, 10.0);
  const EstimateTrajectory e =
      Observer(m, ObserverGain(gain_l())).run(state2(0.5, 0.0, 0.6, 0.0), measurements_from(t));
  std::ostringstream out;
  write_estimates(e, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "t_s,z_hat_1,z_hat_2,vc_hat_1,vc_hat_2,i_hat_1,i_hat_2,y_hat,innovation");
  std::istringstream in(out.str());
  const EstimateTrajectory back = parse_estimates(in);
  ASSERT_EQ(back.size(), e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    EXPECT_EQ(back.xhat[k], e.xhat[k]);
    EXPECT_EQ(back.uhat[k], e.uhat[k]);
    EXPECT_EQ(back.innovation[k], e.innovation[k]);
  }
}

TEST(PackConfig, ParsesUnitsAndOcvBlocks) {
  const PackConfig cfg = parse_pack_config(R"({
    "ocv": {"kind": "table", "z": [0, 0.5, 1], "v": [3.0, 3.6, 4.2], "interp": "linear"},
    "cells": [
      {"r1_ohm": 0.002, "r2_ohm": 0.004, "c_farad": 1500, "q_ah": 2.0, "z0": 0.3},
      {"r1_ohm": 0.003, "r2_ohm": 0.004, "c_farad": 1500, "q_ah": 2.5,
       "ocv": {"kind": "poly", "coeffs": [3.0, 1.2]}}
    ]})");
  ASSERT_EQ(cfg.cells.size(), 2u);
  EXPECT_EQ(cfg.cells[0].q, 7200.0);
  EXPECT_EQ(cfg.z0[0], 0.3);
  EXPECT_EQ(cfg.z0[1], 0.5);
  EXPECT_FALSE(cfg.cells[0].curve().is_polynomial());
  EXPECT_NEAR(cfg.cells[1].curve().value(0.5), 3.6, 1e-15);
  const PackModel m = assemble(cfg);
  EXPECT_NEAR(m.a22_determinant(), 0.005, 1e-15);
}

TEST(PackConfig, ErrorsAreActionable) {
  EXPECT_NE(expect_config_error([] { parse_pack_config("{", "p.json"); }).find("invalid JSON"), std::string::npos);
  EXPECT_NE(expect_config_error([] {
              parse_pack_config(R"({"cells": [{"r1_ohm": 1, "r2_ohm": 1, "c_farad": 1}, {}]})", "p.json");
            }).find("cells[0]: missing key 'q_ah'"),
            std::string::npos);
  EXPECT_NE(expect_config_error([] {
              parse_pack_config(R"({"cells": [{"r1_ohm": -1, "r2_ohm": 1, "c_farad": 1, "q_ah": 1},
                                              {"r1_ohm": 1, "r2_ohm": 1, "c_farad": 1, "q_ah": 1}]})");
            }).find("cells[0]"),
            std::string::npos);
  expect_config_error([] { parse_pack_config(R"({"cells": [{"r1_ohm": 1, "r2_ohm": 1, "c_farad": 1, "q_ah": 1}]})"); });
  expect_config_error([] { parse_pack_config(R"({"ocv": {"kind": "spline"}, "cells": []})"); });
  expect_config_error([] {
    parse_pack_config(R"({"ocv": {"kind": "table", "z": [0, 1], "v": [3, 4], "interp": "cubic"}, "cells": []})");
  });
  EXPECT_THROW(load_pack_config("/nonexistent/pack.json"), Error);
}

TEST(PackConfig, CsvVector) {
  const VectorXd v = parse_csv_vector("-30,-30, -20,2,4,-20");
  EXPECT_EQ(v, gain_l());
  expect_config_error([] { parse_csv_vector("1,,2"); });
  expect_config_error([] { parse_csv_vector("1,x"); });
}

TEST(Scenario, BundledFilesLoad) {
  for (const char* name : {"same_sign.json", "circulating.json", "offset_estimation.json", "identical_cells.json"}) {
    const Scenario s = load_scenario(kScenarios / name);
    EXPECT_EQ(s.pack.cells.size(), 2u) << name;
  }
  const Scenario s = load_scenario(kScenarios / "offset_estimation.json");
  EXPECT_TRUE(s.observer.enabled);
  EXPECT_EQ(s.observer.gain, gain_l());
  EXPECT_NEAR(initial_estimate(s)(0) - initial_state(s)(0), 0.15, 1e-15);
  EXPECT_NEAR(initial_estimate(s)(2) - initial_state(s)(2), 0.10, 1e-15);
}

TEST(Scenario, ValidatesVectorLengthsAndFiles) {
  const std::string pack = R"({"cells": [{"r1_ohm": 0.002, "r2_ohm": 0.004, "c_farad": 1500, "q_ah": 2},
                                         {"r1_ohm": 0.003, "r2_ohm": 0.004, "c_farad": 1500, "q_ah": 2}]})";
  expect_config_error([&] {
    parse_scenario(R"({"pack": )" + pack + R"(, "cycle": {"kind": "synthetic"}, "x0": [0.5, 0, 0.5]})", ".");
  });
  expect_config_error([&] {
    parse_scenario(R"({"pack": )" + pack +
                       R"(, "cycle": {"kind": "synthetic"}, "observer": {"enabled": true, "gain": [1, 2]}})",
                   ".");
  });
  expect_config_error([&] {
    parse_scenario(R"({"pack": )" + pack + R"(, "cycle": {"kind": "file", "path": "nope.csv"}})", "/nonexistent");
  });
  expect_config_error([&] { parse_scenario(R"({"pack": )" + pack + "}", "."); });
}

TEST(Scenario, SameSignCaseSharesSignAndFavoursLowResistance) {
  const fs::path out = temp_dir("same_sign");
  const ScenarioSummary s = run_scenario(load_scenario(kScenarios / "same_sign.json"), out);
  EXPECT_GE(s.sign_agreement, 0.99);
  EXPECT_EQ(s.highest_r1_cell, 1);
  EXPECT_LT(s.highest_r1_share, 0.5);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_LE(s.max_kcl, 1e-9);
  EXPECT_LE(s.max_kvl, 1e-9);
}

TEST(Scenario, CirculatingCaseStartsWithCirculatingCurrent) {
  const Scenario sc = load_scenario(kScenarios / "circulating.json");
  const fs::path out = temp_dir("circulating");
  run_scenario(sc, out);
  const Trajectory t = load_trajectory(out / "trajectory.csv");
  const double i0 = t.total_current.front();
  EXPECT_LT(t.states.front().u(0), 0.0);
  EXPECT_GT(t.states.front().u(1), 0.0);
  EXPECT_LE(std::abs(t.states.front().u.sum()), std::abs(i0) + 1e-9);
}

TEST(Scenario, IdenticalCellsWarnBeforeRunning) {
  std::vector<std::string> seen;
  const ScenarioSummary s = run_scenario(load_scenario(kScenarios / "identical_cells.json"),
                                         temp_dir("identical"),
                                         [&](const std::string& w) { seen.push_back(w); });
  ASSERT_FALSE(seen.empty());
  EXPECT_NE(seen.front().find("Unobservable"), std::string::npos);
  ASSERT_TRUE(s.observability.has_value());
  EXPECT_EQ(*s.observability, Verdict::Unobservable);
}

TEST(Scenario, OutputsAreDeterministicAndSummaryIsRecomputable) {
  const Scenario sc = load_scenario(kScenarios / "offset_estimation.json");
  const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
  const ScenarioSummary sa = run_scenario(sc, a);
  run_scenario(sc, b);
  for (const char* f : {"trajectory.csv", "estimates.csv", "summary.json", "validity.json", "observability.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const PackModel m = assemble(sc.pack);
  const Trajectory t = load_trajectory(a / "trajectory.csv");
  const EstimateTrajectory e = load_estimates(a / "estimates.csv");
  const ScenarioSummary re = summarize(m, t, &e);
  EXPECT_EQ(re.convergence_time, sa.convergence_time);
  EXPECT_EQ(re.final_soc_error, sa.final_soc_error);
  EXPECT_EQ(re.final_current_error, sa.final_current_error);
  EXPECT_EQ(re.sign_agreement, sa.sign_agreement);
  EXPECT_EQ(re.mean_abs_current, sa.mean_abs_current);
}

TEST(Scenario, ConvergenceTimeRequiresStayingBelowThreshold) {
  Trajectory t;
  EstimateTrajectory e;
  const double errs[] = {0.2, 0.005, 0.02, 0.004, 0.003};
  for (int k = 0; k < 5; ++k) {
    t.times.push_back(k);
    t.states.push_back({state2(0.5, 0, 0.5, 0), VectorXd::Zero(2), double(k)});
    e.times.push_back(k);
    e.xhat.push_back(state2(0.5 + errs[k], 0, 0.5, 0));
    e.uhat.push_back(VectorXd::Zero(2));
  }
  EXPECT_EQ(convergence_time(t, e), 3.0);
  e.xhat.back()(2) += 0.5;
  EXPECT_FALSE(convergence_time(t, e).has_value());
}
