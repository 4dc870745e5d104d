#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "parcell/cell_model.hpp"

namespace parcell {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Numerical tolerances used by the consistency checks of a pack.
struct PackTolerances {
  double kcl = 1e-9;        // |sum I_k - I| relative to max(1, |I|)
  double kvl = 1e-9;        // max pairwise terminal-voltage mismatch [V]
  double singular = 1e-12;  // |det A22| threshold relative to the Frobenius norm of A22
};

/// Differential state x = (z_1, vc_1, ..., z_n, vc_n), algebraic state
/// u = (I_1, ..., I_n), and the time they belong to.
struct PackState {
  VectorXd x;
  VectorXd u;
  double t = 0.0;
};

/// n cells in parallel written as the descriptor system
///
///   E w' = A w + theta(w),   y = H w + phi(w),   w = (x, u).
///
/// The algebraic block collects Kirchhoff's laws: rows 1..n-1 equate the
/// terminal voltage of cell 1 with cell j+1, and the last row is the current
/// balance sum I_k = I. Because A22 is constant, its LU factorization is
/// computed once at assembly and reused by every algebraic solve.
class PackModel {
 public:
  static PackModel assemble(std::vector<CellParams> cells, PackTolerances tol = {});

  int n() const { return n_; }
  int nx() const { return 2 * n_; }
  int nw() const { return 3 * n_; }
  const std::vector<CellParams>& cells() const { return cells_; }
  const CellParams& cell(int k) const { return cells_[static_cast<std::size_t>(k)]; }
  const PackTolerances& tolerances() const { return tol_; }

  const MatrixXd& e_mat() const { return e_; }
  const MatrixXd& a_mat() const { return a_; }
  const MatrixXd& h_mat() const { return h_; }
  auto a11() const { return a_.topLeftCorner(nx(), nx()); }
  auto a12() const { return a_.topRightCorner(nx(), n_); }
  auto a21() const { return a_.bottomLeftCorner(n_, nx()); }
  auto a22() const { return a_.bottomRightCorner(n_, n_); }
  auto hx() const { return h_.leftCols(nx()); }
  auto hu() const { return h_.rightCols(n_); }

  double a22_determinant() const { return a22_det_; }
  double a22_condition() const { return a22_cond_; }

  /// theta_I = (0, ..., 0, -1): how the total current enters the algebraic rows.
  VectorXd theta_i() const;
  /// OCV differences OCV_1(z_1) - OCV_j(z_j), j = 2..n, with a trailing zero.
  VectorXd theta_ocv(const VectorXd& x) const;
  /// Algebraic-row nonlinearity theta_ocv(x) + theta_I * i_total.
  VectorXd theta_u(const VectorXd& x, double i_total) const;
  /// Full 3n nonlinearity; the differential rows are zero.
  VectorXd theta(const VectorXd& x, double i_total) const;
  /// Per-cell open-circuit voltages.
  VectorXd phi(const VectorXd& x) const;

  /// Branch currents consistent with x and the total current.
  VectorXd solve_algebraic(const VectorXd& x, double i_total) const;

  /// Drift and input field of the reduced control-affine model x' = f(x) + g i.
  VectorXd reduced_f(const VectorXd& x) const;
  const VectorXd& reduced_g() const { return g_; }
  VectorXd reduced_rhs(const VectorXd& x, double i_total) const;

  /// Reduced scalar output h(x) of the measured (first) cell, excluding the
  /// instantaneous resistive shift, and the shift coefficient itself, so that
  /// terminal voltage = reduced_h(x) + output_shift() * i_total.
  double reduced_h(const VectorXd& x) const;
  double output_shift() const { return output_shift_; }

  /// Terminal voltage of every cell at (x, u).
  VectorXd cell_voltages(const VectorXd& x, const VectorXd& u) const;

  /// Terminal voltage at (x, solve_algebraic(x, i_total)). Throws
  /// VoltageMismatch if the per-cell voltages disagree beyond tolerance.
  double reduced_output(const VectorXd& x, double i_total) const;

  /// Solve A22 v = rhs with the cached factorization.
  VectorXd a22_solve(const VectorXd& rhs) const;
  MatrixXd a22_solve(const MatrixXd& rhs) const;

  /// Matrix of the linear part of the reduced model, A11 - A12 A22^-1 A21.
  const MatrixXd& reduced_linear() const { return f_lin_; }
  /// -A12 A22^-1, which maps theta_ocv into the reduced drift.
  const MatrixXd& reduced_coupling() const { return coupling_; }
  /// reduced_h(x) = h_linear_row . x + h_ocv_row . theta_ocv(x) + OCV_1(z_1).
  const RowVectorXd& reduced_h_linear_row() const { return h_lin_row_; }
  const RowVectorXd& reduced_h_ocv_row() const { return h_ocv_row_; }

 private:
  PackModel() = default;

  int n_ = 0;
  std::vector<CellParams> cells_;
  PackTolerances tol_;
  MatrixXd e_, a_, h_;
  Eigen::PartialPivLU<MatrixXd> a22_lu_;
  double a22_det_ = 0.0;
  double a22_cond_ = 0.0;
  MatrixXd f_lin_, coupling_;
  VectorXd g_;
  RowVectorXd h_lin_row_, h_ocv_row_;
  double output_shift_ = 0.0;
};

/// Residuals of Kirchhoff's laws for a state.
struct ConsistencyResiduals {
  double kcl = 0.0;  // |sum u - i_total|
  double kvl = 0.0;  // max pairwise terminal-voltage difference [V]
};

ConsistencyResiduals consistency_residuals(const PackModel& model, const VectorXd& x,
                                           const VectorXd& u, double i_total);

/// Plain-text dump of E, A, H (row-major, shortest round-trip precision).
void write_matrix_dump(const PackModel& model, std::ostream& os);

}  // namespace parcell
