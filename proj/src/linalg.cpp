#include "parcell/linalg.hpp"

#include <limits>

namespace parcell {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  const double cut = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++r;
  }
  return r;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  return rank_from_singular_values(singular_values(m), rel_tol);
}

int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  return rank_from_singular_values(singular_values(m), rel_tol);
}

double spectral_abscissa(const Eigen::VectorXcd& eigs) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eigs.size(); ++i) best = std::max(best, eigs(i).real());
  return best;
}

}  // namespace parcell
