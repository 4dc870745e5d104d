#include "parcell/pack_model.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "parcell/errors.hpp"
#include "parcell/linalg.hpp"
#include "parcell/number_format.hpp"

namespace parcell {

PackModel PackModel::assemble(std::vector<CellParams> cells, PackTolerances tol) {
  const int n = static_cast<int>(cells.size());
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "a parallel pack needs at least two cells");
  }
  for (const auto& c : cells) c.validate();

  PackModel m;
  m.n_ = n;
  m.cells_ = std::move(cells);
  m.tol_ = tol;
  const int nx = 2 * n;
  const int nw = 3 * n;

  m.e_ = MatrixXd::Zero(nw, nw);
  m.e_.topLeftCorner(nx, nx).setIdentity();

  m.a_ = MatrixXd::Zero(nw, nw);
  m.h_ = MatrixXd::Zero(n, nw);
  for (int k = 0; k < n; ++k) {
    const CellMatrices cm = cell_matrices(m.cells_[static_cast<std::size_t>(k)]);
    m.a_.block<2, 2>(2 * k, 2 * k) = cm.a_bar;
    m.a_.block<2, 1>(2 * k, nx + k) = cm.b_bar;
    // H_x = diag(-S) with S = [0, -1]; H_u = diag(r1).
    m.h_(k, 2 * k + 1) = 1.0;
    m.h_(k, nx + k) = cm.d_bar;
  }
  // Voltage-balance rows: vc_1 - vc_{j+1} + r1_1 I_1 - r1_{j+1} I_{j+1} + OCV diff = 0.
  for (int j = 0; j + 1 < n; ++j) {
    const int row = nx + j;
    m.a_(row, 1) = 1.0;
    m.a_(row, 2 * (j + 1) + 1) = -1.0;
    m.a_(row, nx) = m.cells_[0].r1;
    m.a_(row, nx + j + 1) = -m.cells_[static_cast<std::size_t>(j + 1)].r1;
  }
  // Current balance: sum I_k - I = 0.
  m.a_.block(nx + n - 1, nx, 1, n).setOnes();

  const MatrixXd a22 = m.a22();
  m.a22_lu_.compute(a22);
  m.a22_det_ = m.a22_lu_.determinant();
  const double a22_norm = a22.norm();
  if (!std::isfinite(m.a22_det_) || std::abs(m.a22_det_) <= tol.singular * a22_norm) {
    throw Error(ErrorCode::SingularA22,
                "|det(A22)| = " + format_double(std::abs(m.a22_det_)) + " is below tolerance");
  }
  const Eigen::VectorXd sv = singular_values(a22);
  m.a22_cond_ = sv(0) / sv(sv.size() - 1);

  MatrixXd stacked(2 * n, n);
  stacked << a22, m.hu();
  if (numerical_rank(stacked) < n) {
    throw Error(ErrorCode::ImpulseUnobservable, "rank([A22; Hu]) < n");
  }

  const MatrixXd a22_inv_a21 = m.a22_solve(MatrixXd(m.a21()));
  m.f_lin_ = m.a11() - m.a12() * a22_inv_a21;
  m.coupling_ = -(m.a12() * m.a22_solve(MatrixXd(MatrixXd::Identity(n, n))));
  m.g_ = m.coupling_ * m.theta_i();

  const RowVectorXd hx0 = m.hx().row(0);
  const RowVectorXd hu0 = m.hu().row(0);
  const RowVectorXd hu0_a22inv = MatrixXd(a22.transpose()).partialPivLu().solve(VectorXd(hu0.transpose())).transpose();
  m.h_lin_row_ = hx0 - hu0_a22inv * m.a21();
  m.h_ocv_row_ = -hu0_a22inv;
  m.output_shift_ = -(hu0_a22inv * m.theta_i())(0);
  return m;
}

VectorXd PackModel::theta_i() const {
  VectorXd t = VectorXd::Zero(n_);
  t(n_ - 1) = -1.0;
  return t;
}

VectorXd PackModel::theta_ocv(const VectorXd& x) const {
  VectorXd t = VectorXd::Zero(n_);
  const double ocv1 = cells_[0].curve().value(x(0));
  for (int j = 1; j < n_; ++j) {
    t(j - 1) = ocv1 - cells_[static_cast<std::size_t>(j)].curve().value(x(2 * j));
  }
  return t;
}

VectorXd PackModel::theta_u(const VectorXd& x, double i_total) const {
  VectorXd t = theta_ocv(x);
  t(n_ - 1) -= i_total;
  return t;
}

VectorXd PackModel::theta(const VectorXd& x, double i_total) const {
  VectorXd t = VectorXd::Zero(nw());
  t.tail(n_) = theta_u(x, i_total);
  return t;
}

VectorXd PackModel::phi(const VectorXd& x) const {
  VectorXd p(n_);
  for (int k = 0; k < n_; ++k) p(k) = cells_[static_cast<std::size_t>(k)].curve().value(x(2 * k));
  return p;
}

VectorXd PackModel::a22_solve(const VectorXd& rhs) const { return a22_lu_.solve(rhs); }
MatrixXd PackModel::a22_solve(const MatrixXd& rhs) const { return a22_lu_.solve(rhs); }

VectorXd PackModel::solve_algebraic(const VectorXd& x, double i_total) const {
  return -a22_solve(VectorXd(a21() * x + theta_u(x, i_total)));
}

VectorXd PackModel::reduced_f(const VectorXd& x) const {
  return f_lin_ * x + coupling_ * theta_ocv(x);
}

VectorXd PackModel::reduced_rhs(const VectorXd& x, double i_total) const {
  return reduced_f(x) + g_ * i_total;
}

double PackModel::reduced_h(const VectorXd& x) const {
  return h_lin_row_.dot(x) + h_ocv_row_.dot(theta_ocv(x)) + cells_[0].curve().value(x(0));
}

VectorXd PackModel::cell_voltages(const VectorXd& x, const VectorXd& u) const {
  return hx() * x + hu() * u + phi(x);
}

double PackModel::reduced_output(const VectorXd& x, double i_total) const {
  const VectorXd v = cell_voltages(x, solve_algebraic(x, i_total));
  const double spread = v.maxCoeff() - v.minCoeff();
  if (!(spread <= tol_.kvl)) {
    throw Error(ErrorCode::VoltageMismatch,
                "cell terminal voltages disagree by " + format_double(spread) + " V");
  }
  return v(0);
}

ConsistencyResiduals consistency_residuals(const PackModel& model, const VectorXd& x,
                                           const VectorXd& u, double i_total) {
  const VectorXd v = model.cell_voltages(x, u);
  return {std::abs(u.sum() - i_total), v.maxCoeff() - v.minCoeff()};
}

void write_matrix_dump(const PackModel& model, std::ostream& os) {
  auto dump = [&os](const char* name, const MatrixXd& m) {
    os << "# " << name << ' ' << m.rows() << 'x' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) os << ' ';
        os << format_double(m(r, c));
      }
      os << '\n';
    }
  };
  dump("E", model.e_mat());
  dump("A", model.a_mat());
  dump("H", model.h_mat());
}

}  // namespace parcell
