#pragma once

#include <Eigen/Dense>

#include "parcell/ocv_curve.hpp"

namespace parcell {

/// Equivalent-circuit constants of one cell: series resistance r1, one RC
/// pair (r2, c) and capacity q. Capacity is stored in ampere-seconds.
struct CellParams {
  double r1 = 0.0;  // [ohm]
  double r2 = 0.0;  // [ohm]
  double c = 0.0;   // [F]
  double q = 0.0;   // [A s]
  OcvCurvePtr ocv = default_ocv_ptr();

  static CellParams from_amp_hours(double r1_ohm, double r2_ohm, double c_farad, double q_ah,
                                   OcvCurvePtr ocv = default_ocv_ptr());

  /// Throws InvalidArgument unless every constant is finite and positive.
  void validate() const;

  const OcvCurve& curve() const { return *ocv; }
};

struct CellState {
  double z = 0.0;    // state of charge [-]
  double v_c = 0.0;  // RC capacitor voltage [V]
};

struct CellMatrices {
  Eigen::Matrix2d a_bar;
  Eigen::Vector2d b_bar;
  double d_bar = 0.0;
};

/// State-space matrices of a single cell: zdot = i/q, vc' = -vc/(r2 c) + i/c.
/// Positive current charges the cell.
CellMatrices cell_matrices(const CellParams& p);

/// Terminal voltage OCV(z) + v_c + r1 * i of one cell.
double cell_output(const CellState& s, double i_k, const CellParams& p);

}  // namespace parcell
