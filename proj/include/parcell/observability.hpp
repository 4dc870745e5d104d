#pragma once

#include <complex>
#include <string>
#include <vector>

#include "parcell/linalg.hpp"
#include "parcell/pack_model.hpp"

namespace parcell {

/// Linearization E w' = F w, y = C w of the descriptor model at w_bar, with
/// F = A + dtheta/dw and C = H + dphi/dw (full n-row output map).
struct LinearizedSystem {
  MatrixXd f_mat;
  MatrixXd c_mat;
  MatrixXd e_mat;
  VectorXd linearization_point;
};

/// Analytic Jacobians of the nonlinearities. Only OCV slopes appear.
MatrixXd theta_jacobian(const PackModel& model, const VectorXd& x);
MatrixXd phi_jacobian(const PackModel& model, const VectorXd& x);

/// w_bar may be a 3n descriptor point or a 2n differential state.
LinearizedSystem linearize(const PackModel& model, const VectorXd& w_bar);

/// (x, solve_algebraic(x, i_total)) stacked into a 3n descriptor point.
VectorXd consistent_point(const PackModel& model, const VectorXd& x, double i_total = 0.0);

struct PencilEigenvalue {
  std::complex<double> s;
  int rank = 0;
  double sigma_min = 0.0;
};

struct CObservabilityResult {
  bool c1 = false;
  bool c2 = false;
  int c1_rank = 0;
  Eigen::VectorXd c1_singular_values;
  std::vector<PencilEigenvalue> c2_results;
  int infinite_eigenvalues = 0;
  bool solver_failed = false;
};

/// C.1: rank [E; C] = 3n. C.2: rank [sE - F; C] = 3n, checked at the finite
/// generalized eigenvalues of (E, F); everywhere else sE - F is already
/// nonsingular so the rank cannot drop.
CObservabilityResult check_c_observability(const LinearizedSystem& lin,
                                           double rank_tol = kDefaultRankTol);

enum class LieMethod { Taylor, CentralDifference };

inline constexpr int kMaxLieOrder = 4;

struct LieOptions {
  int max_order = 2;
  LieMethod method = LieMethod::Taylor;
  double fd_step = 1e-3;
};

struct LieMatrix {
  MatrixXd rows;                    // one gradient per row, 2n columns
  std::vector<std::string> labels;  // e.g. "L_g L_f h"
};

/// Stacked gradients dL_{v_s} ... L_{v_1} h(x0), v_i in {f, g}, for every word
/// of length 0..max_order. Rows are ordered by word length, then by the order
/// the shorter words were produced, f before g. h is the measured (first
/// cell) output of the reduced model.
///
/// The Taylor method propagates truncated multivariate Taylor polynomials and
/// needs OCV derivatives up to max_order + 1. The central-difference method
/// nests finite-difference gradients and is limited to max_order <= 2.
LieMatrix lie_observability_matrix(const PackModel& model, const VectorXd& x0,
                                   const LieOptions& opts = {});

enum class Pathology {
  EquivalentParameters = 1,    // equal tau, r1*q and r1*c products
  MatchingOcv = 2,             // equal OCV value and slope at x0
  VanishingOcvDerivative = 3,  // some OCV derivative of order >= 1 is zero
};

struct PathologyReport {
  std::vector<Pathology> triggered;
  int checked_derivative_order = 0;
};

/// Two-cell conditions under which the Lie rank test cannot certify
/// observability. Throws UnsupportedN for n != 2.
PathologyReport check_pathologies(const PackModel& model, const VectorXd& x0,
                                  double rel_tol = 1e-9, double abs_tol = 1e-9);

enum class Verdict { Observable, Unobservable, Indeterminate };
enum class ObservabilityTest { Linearized, Lie, Both };

std::string_view to_string(Verdict v);

struct ObservabilityOptions {
  ObservabilityTest test = ObservabilityTest::Both;
  LieOptions lie;
  double rank_tol = kDefaultRankTol;
  double i_total = 0.0;
};

struct ObservabilityReport {
  int n = 0;
  VectorXd x0;
  int c1_rank = 0;
  bool c1 = false;
  bool c2 = false;
  std::vector<PencilEigenvalue> c2_results;
  Verdict linear_verdict = Verdict::Indeterminate;
  int lie_rank = 0;
  VectorXd lie_singular_values;
  std::vector<std::string> lie_labels;
  Verdict lie_verdict = Verdict::Indeterminate;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<int> triggered_conditions;
  int pathology_order_checked = 0;
  std::vector<std::string> notes;
};

/// Runs the requested tests at x0. The combined verdict is Observable if any
/// requested test certifies observability, Indeterminate if a test could not
/// be evaluated and none certified, and Unobservable otherwise.
ObservabilityReport analyze_observability(const PackModel& model, const VectorXd& x0,
                                          const ObservabilityOptions& opts = {});

}  // namespace parcell
