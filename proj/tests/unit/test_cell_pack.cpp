#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "parcell/errors.hpp"
#include "parcell/observability.hpp"
#include "parcell/pack_model.hpp"

using namespace parcell;
using namespace parcell::testing;

TEST(CellModel, MatricesFollowEquivalentCircuit) {
  const CellParams p = CellParams::from_amp_hours(0.0025, 0.004, 1500.0, 2.3);
  EXPECT_DOUBLE_EQ(p.q, 2.3 * 3600.0);
  const CellMatrices m = cell_matrices(p);
  EXPECT_EQ(m.a_bar(0, 0), 0.0);
  EXPECT_EQ(m.a_bar(0, 1), 0.0);
  EXPECT_EQ(m.a_bar(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.a_bar(1, 1), -1.0 / (0.004 * 1500.0));
  EXPECT_DOUBLE_EQ(m.b_bar(0), 1.0 / (2.3 * 3600.0));
  EXPECT_DOUBLE_EQ(m.b_bar(1), 1.0 / 1500.0);
  EXPECT_EQ(m.d_bar, 0.0025);
}

TEST(CellModel, OutputAddsOcvRcAndOhmicDrop) {
  const CellParams p = CellParams::from_amp_hours(0.0025, 0.004, 1500.0, 2.3);
  const double v = cell_output({0.5, 0.01}, 4.0, p);
  EXPECT_NEAR(v, p.curve().value(0.5) + 0.01 + 0.0025 * 4.0, 1e-15);
}

TEST(CellModel, ValidateRejectsNonPositive) {
  EXPECT_THROW(CellParams::from_amp_hours(0.0, 0.004, 1500.0, 2.3).validate(), Error);
  EXPECT_THROW(CellParams::from_amp_hours(0.001, -1.0, 1500.0, 2.3).validate(), Error);
  EXPECT_THROW(CellParams::from_amp_hours(0.001, 0.004, NAN, 2.3).validate(), Error);
}

TEST(PackModel, TwoCellStructureMatchesKirchhoffPattern) {
  const PackModel m = reference_model();
  ASSERT_EQ(m.nw(), 6);
  MatrixXd e_expected = MatrixXd::Zero(6, 6);
  e_expected.topLeftCorner(4, 4).setIdentity();
  EXPECT_EQ(m.e_mat(), e_expected);

  MatrixXd a_expected = MatrixXd::Zero(6, 6);
  a_expected(1, 1) = -1.0 / (0.004 * 1500.0);
  a_expected(3, 3) = -1.0 / (0.0035 * 2000.0);
  a_expected(0, 4) = 1.0 / (2.3 * 3600.0);
  a_expected(1, 4) = 1.0 / 1500.0;
  a_expected(2, 5) = 1.0 / (2.0 * 3600.0);
  a_expected(3, 5) = 1.0 / 2000.0;
  a_expected(4, 1) = 1.0;
  a_expected(4, 3) = -1.0;
  a_expected(4, 4) = 0.0025;
  a_expected(4, 5) = -0.0015;
  a_expected(5, 4) = 1.0;
  a_expected(5, 5) = 1.0;
  EXPECT_EQ(m.a_mat(), a_expected);

  MatrixXd h_expected = MatrixXd::Zero(2, 6);
  h_expected(0, 1) = 1.0;
  h_expected(1, 3) = 1.0;
  h_expected(0, 4) = 0.0025;
  h_expected(1, 5) = 0.0015;
  EXPECT_EQ(m.h_mat(), h_expected);
  EXPECT_NEAR(m.a22_determinant(), 0.004, 1e-18);
}

TEST(PackModel, ThreeCellDeterminantMatchesCofactorExpansion) {
  const double r[3] = {0.002, 0.003, 0.005};
  std::vector<CellParams> cells;
  for (double r1 : r) cells.push_back(CellParams::from_amp_hours(r1, 0.004, 1500.0, 2.3));
  const PackModel m = PackModel::assemble(cells);
  // Cofactor expansion of [[r1, -r2, 0], [r1, 0, -r3], [1, 1, 1]] along the first row.
  const double det = r[0] * (0.0 * 1.0 - (-r[2]) * 1.0) - (-r[1]) * (r[0] * 1.0 - (-r[2]) * 1.0);
  EXPECT_NEAR(m.a22_determinant(), det, 1e-18);
  EXPECT_NEAR(det, r[0] * r[1] + r[0] * r[2] + r[1] * r[2], 1e-18);
  EXPECT_EQ(m.a21()(1, 1), 1.0);
  EXPECT_EQ(m.a21()(1, 5), -1.0);
  EXPECT_EQ(m.a22()(1, 0), r[0]);
  EXPECT_EQ(m.a22()(1, 2), -r[2]);
}

TEST(PackModel, RejectsSingleCellAndSingularA22) {
  try {
    PackModel::assemble({CellParams::from_amp_hours(0.002, 0.004, 1500.0, 2.3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  try {
    PackModel::assemble({CellParams::from_amp_hours(1e-14, 0.004, 1500.0, 2.3),
                         CellParams::from_amp_hours(1e-14, 0.004, 1500.0, 2.3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularA22);
  }
}

TEST(PackModel, EqualStateCurrentSplitFollowsConductances) {
  const PackModel m = reference_model();
  const VectorXd x = state2(0.6, 0.0, 0.6, 0.0);
  for (double i : {-20.0, 1.0, 7.5}) {
    const VectorXd u = m.solve_algebraic(x, i);
    EXPECT_NEAR(u(0), 0.375 * i, 1e-12 * std::abs(i));
    EXPECT_NEAR(u(1), 0.625 * i, 1e-12 * std::abs(i));
  }
}

TEST(PackModel, StepVoltageIsParallelResistance) {
  const PackModel m = reference_model();
  const VectorXd x = state2(0.5, 0.0, 0.5, 0.0);
  const double r_par = 0.0025 * 0.0015 / (0.0025 + 0.0015);
  EXPECT_NEAR(m.output_shift(), r_par, 1e-15);
  EXPECT_NEAR(m.reduced_output(x, 10.0) - m.reduced_output(x, 0.0), 10.0 * r_par, 1e-12);
}

TEST(PackModel, AlgebraicSolutionSatisfiesKirchhoff) {
  const PackModel m = reference_model();
  for (const VectorXd& x : random_points(2, 20, 3)) {
    const VectorXd u = m.solve_algebraic(x, 12.3);
    const auto r = consistency_residuals(m, x, u, 12.3);
    EXPECT_LT(r.kcl, 1e-12);
    EXPECT_LT(r.kvl, 1e-12);
  }
}

TEST(PackModel, ReducedOutputGradientMatchesClosedForm) {
  const PackModel m = reference_model();
  const double r11 = 0.0025, r12 = 0.0015;
  const VectorXd x = state2(0.3, 0.01, 0.7, -0.02);
  const OcvCurve& ocv = m.cell(0).curve();
  VectorXd expected(4);
  expected << r12 * ocv.derivative(0.3, 1), r12, r11 * ocv.derivative(0.7, 1), r11;
  expected /= (r11 + r12);
  for (int j = 0; j < 4; ++j) {
    VectorXd xp = x, xm = x;
    xp(j) += 1e-6;
    xm(j) -= 1e-6;
    EXPECT_NEAR((m.reduced_h(xp) - m.reduced_h(xm)) / 2e-6, expected(j), 1e-7) << "column " << j;
  }
}

TEST(PackModel, ReducedModelMatchesDescriptorSolve) {
  // Solve [I -A12; 0 A22] [x'; u] = [A11 x; -A21 x - theta_u] with a fresh
  // factorization of the full block system.
  const PackModel m = reference_model();
  MatrixXd big = MatrixXd::Zero(6, 6);
  big.topLeftCorner(4, 4).setIdentity();
  big.topRightCorner(4, 2) = -m.a12();
  big.bottomRightCorner(2, 2) = m.a22();
  const auto lu = big.fullPivLu();
  for (const VectorXd& x : random_points(2, 50, 9)) {
    const double i = 15.0 * (x(0) - 0.5);
    VectorXd rhs(6);
    rhs.head(4) = m.a11() * x;
    rhs.tail(2) = -(m.a21() * x) - m.theta_u(x, i);
    const VectorXd sol = lu.solve(rhs);
    const VectorXd red = m.reduced_rhs(x, i);
    EXPECT_LT((sol.head(4) - red).norm(), 1e-12 * std::max(1.0, red.norm()));
    EXPECT_LT((sol.tail(2) - m.solve_algebraic(x, i)).norm(), 1e-10);
  }
}

TEST(PackModel, MatrixDumpHasAllSections) {
  std::ostringstream os;
  write_matrix_dump(reference_model(), os);
  const std::string s = os.str();
  EXPECT_NE(s.find("# E 6x6"), std::string::npos);
  EXPECT_NE(s.find("# A 6x6"), std::string::npos);
  EXPECT_NE(s.find("# H 2x6"), std::string::npos);
  EXPECT_NE(s.find("0.0025"), std::string::npos);
}
