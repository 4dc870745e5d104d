#pragma once

#include <Eigen/Dense>

namespace parcell {

/// Relative threshold below which a singular value does not count toward rank.
inline constexpr double kDefaultRankTol = 1e-10;

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m);

/// Number of singular values greater than rel_tol * sigma_max. A zero matrix
/// has rank 0.
int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol = kDefaultRankTol);
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);
int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol = kDefaultRankTol);

/// Largest real part among the eigenvalues (spectral abscissa).
double spectral_abscissa(const Eigen::VectorXcd& eigs);

}  // namespace parcell
