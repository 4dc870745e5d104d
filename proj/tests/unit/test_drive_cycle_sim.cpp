#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "parcell/drive_cycle.hpp"
#include "parcell/errors.hpp"
#include "parcell/plant_sim.hpp"

using namespace parcell;
using namespace parcell::testing;

TEST(DriveCycle, ZeroOrderHoldAndLinear) {
  const std::vector<CycleSample> s{{0.0, 1.0}, {1.0, 3.0}, {2.0, -1.0}};
  const DriveCycle zoh(s, CycleInterp::ZeroOrderHold);
  const DriveCycle lin(s, CycleInterp::Linear);
  EXPECT_EQ(zoh.current_at(0.5), 1.0);
  EXPECT_EQ(zoh.current_at(1.0), 3.0);
  EXPECT_EQ(zoh.current_at(2.0), -1.0);
  EXPECT_DOUBLE_EQ(lin.current_at(0.5), 2.0);
  EXPECT_DOUBLE_EQ(lin.current_at(1.5), 1.0);
  EXPECT_TRUE(zoh.covers(0.0, 2.0));
  EXPECT_FALSE(zoh.covers(0.0, 2.5));
  EXPECT_EQ(zoh.max_abs_current(), 3.0);
}

TEST(DriveCycle, RejectsNonMonotoneOrNonFinite) {
  EXPECT_THROW(DriveCycle({{0.0, 1.0}, {0.0, 2.0}}), Error);
  EXPECT_THROW(DriveCycle({{0.0, 1.0}, {1.0, NAN}}), Error);
}

TEST(DriveCycle, SyntheticCycleIsScaledFadedAndDeterministic) {
  const DriveCycle a = synth_udds_like(20.0, 1400.0, 7);
  const DriveCycle b = synth_udds_like(20.0, 1400.0, 7);
  const DriveCycle c = synth_udds_like(20.0, 1400.0, 8);
  ASSERT_EQ(a.samples().size(), 1401u);
  EXPECT_NEAR(a.max_abs_current(), 20.0, 1e-12);
  EXPECT_EQ(a.samples().front().i, 0.0);
  int sign_changes = 0;
  for (std::size_t k = 0; k < a.samples().size(); ++k) {
    EXPECT_EQ(a.samples()[k].i, b.samples()[k].i);
    if (k > 0 && a.samples()[k].i * a.samples()[k - 1].i < 0.0) ++sign_changes;
  }
  EXPECT_GT(sign_changes, 10);
  EXPECT_NE(a.samples()[100].i, c.samples()[100].i);
}

TEST(PlantSim, ChargeIsConservedAcrossCells) {
  // sum_k q_k dz_k/dt = sum_k I_k = I, and RK4 preserves linear invariants.
  const PackModel m = reference_model();
  const DriveCycle cycle = synth_udds_like(20.0, 200.0, 3);
  const Trajectory t = simulate(m, state2(0.4, 0.0, 0.5, 0.0), cycle, 0.1, 200.0);
  double charge = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) charge += t.total_current[k] * (t.times[k + 1] - t.times[k]);
  const VectorXd& xf = t.states.back().x;
  const double stored = m.cell(0).q * (xf(0) - 0.4) + m.cell(1).q * (xf(2) - 0.5);
  EXPECT_NEAR(stored, charge, 1e-8);
}

TEST(PlantSim, RestingEqualCellsStayPut) {
  const PackModel m = reference_model();
  const Trajectory t = simulate(m, state2(0.5, 0.0, 0.5, 0.0), constant_cycle(0.0, 50.0), 0.1, 50.0);
  EXPECT_LT((t.states.back().x - state2(0.5, 0.0, 0.5, 0.0)).norm(), 1e-15);
}

TEST(PlantSim, UnequalSocEqualizesThroughCirculatingCurrent) {
  const PackModel m = reference_model();
  const Trajectory t = simulate(m, state2(0.6, 0.0, 0.4, 0.0), constant_cycle(0.0, 3000.0), 1.0, 3000.0);
  EXPECT_LT(t.states.front().u(0), 0.0);
  EXPECT_GT(t.states.front().u(1), 0.0);
  const VectorXd& xf = t.states.back().x;
  EXPECT_LT(std::abs(xf(0) - xf(2)), 0.05);
}

TEST(PlantSim, ShortensLastStepToHitHorizon) {
  const PackModel m = reference_model();
  const Trajectory t = simulate(m, state2(0.5, 0.0, 0.5, 0.0), constant_cycle(1.0, 10.0), 0.3, 1.0);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
}

TEST(PlantSim, ErrorsAndSocEvents) {
  const PackModel m = reference_model();
  try {
    simulate(m, state2(0.5, 0.0, 0.5, 0.0), constant_cycle(1.0, 10.0), 0.1, 20.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CycleGap);
  }
  EXPECT_THROW(simulate(m, VectorXd::Zero(3), constant_cycle(1.0, 10.0), 0.1, 5.0), Error);
  // 40 A into nearly full cells crosses z = 1 quickly.
  const Trajectory t = simulate(m, state2(0.999, 0.0, 0.999, 0.0), constant_cycle(40.0, 100.0),
                                SimOptions{0.1, 100.0, true});
  ASSERT_FALSE(t.soc_events.empty());
  EXPECT_TRUE(t.soc_events.front().exited);
  EXPECT_TRUE(t.stopped_early);
}

TEST(PlantSim, Rk4IsFourthOrderOnLinearSegment) {
  // With an affine OCV the reduced model is linear, so the exact solution is a
  // matrix exponential of the augmented system.
  auto ocv = std::make_shared<const OcvCurve>(OcvCurve::polynomial({3.2, 0.9}));
  auto cells = reference_cells();
  for (auto& c : cells) c.ocv = ocv;
  const PackModel m = PackModel::assemble(cells);
  const double i = 15.0, horizon = 40.0;
  const VectorXd x0 = state2(0.7, 0.0, 0.3, 0.0);

  const VectorXd b = m.reduced_rhs(VectorXd::Zero(4), i);
  MatrixXd aug = MatrixXd::Zero(5, 5);
  aug.topLeftCorner(4, 4) = m.reduced_linear();
  // reduced_rhs is affine: f(x) = F x + b with F from the full Jacobian.
  for (int j = 0; j < 4; ++j) {
    aug.block(0, j, 4, 1) = m.reduced_rhs(VectorXd::Unit(4, j), i) - b;
  }
  aug.block(0, 4, 4, 1) = b;
  VectorXd y0(5);
  y0 << x0, 1.0;
  const VectorXd exact = ((aug * horizon).exp() * y0).head(4);

  std::vector<double> errs;
  for (double dt : {0.4, 0.2, 0.1}) {
    const Trajectory t = simulate(m, x0, constant_cycle(i, horizon), dt, horizon);
    errs.push_back((t.states.back().x - exact).norm());
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  EXPECT_GE(order1, 3.7) << errs[0] << " " << errs[1];
  EXPECT_GE(order2, 3.7) << errs[1] << " " << errs[2];
}
