#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "parcell/pack_model.hpp"
#include "parcell/plant_sim.hpp"

namespace parcell {

/// Output-injection gain K = (K_x, K_u) of the descriptor observer.
class ObserverGain {
 public:
  explicit ObserverGain(VectorXd k);

  const VectorXd& k() const { return k_; }
  int n() const { return static_cast<int>(k_.size() / 3); }
  auto k_x() const { return k_.head(2 * n()); }
  auto k_u() const { return k_.tail(n()); }

 private:
  VectorXd k_;
};

/// Linear part of the scalar measurement: the terminal voltage is read as
/// cell 1's output row, y = h_x x + h_u u + OCV_1(z_1).
RowVectorXd measured_row(const PackModel& model);

enum class OutputMap {
  MeasuredRow,  // row 1 of H, the measured cell
  CellAverage,  // mean of the n rows of H
};

/// G = A - K H and its 2n / n partition, plus the reduced error matrix
/// G~ = G11 - G12 G22^-1 G21. With a linearization point, A and H are
/// replaced by A + dtheta/dw and H + dphi/dw evaluated there.
struct ErrorMatrices {
  MatrixXd g, g11, g12, g21, g22, g_tilde;
  Eigen::VectorXcd g_tilde_eigs;
  double g22_condition = 0.0;
};

ErrorMatrices build_error_matrices(const PackModel& model, const ObserverGain& gain,
                                   const std::optional<VectorXd>& linearization_x = std::nullopt,
                                   OutputMap map = OutputMap::MeasuredRow);

/// Box of differential states over which the Lipschitz constant is sampled.
struct LipschitzRegion {
  double z_lo = 0.05;
  double z_hi = 0.95;
  double vc_lo = -0.2;
  double vc_hi = 0.2;
};

struct LipschitzEstimate {
  double gamma_hat = 0.0;
  double pair_estimate = 0.0;
  double jacobian_estimate = 0.0;
  int samples = 0;
};

/// Sampled Lipschitz constant of the aggregated error nonlinearity
///   f(x) = theta_x - G12 G22^-1 theta_u(x) + (G12 G22^-1 K_u - K_x) phi(x),
/// where theta and phi are the parts not already captured by the linear
/// matrices (the full nonlinearities without a linearization point, or their
/// residuals after subtracting the Jacobian at it). Returns the larger of the
/// all-pairs difference quotient and the sampled spectral norm of the
/// analytic Jacobian. Samples are drawn sequentially from the seed, so a
/// larger sample count always contains the smaller one.
LipschitzEstimate estimate_lipschitz(const PackModel& model, const ObserverGain& gain,
                                     const LipschitzRegion& region, int n_samples,
                                     std::uint64_t seed,
                                     const std::optional<VectorXd>& linearization_x = std::nullopt);

/// omega = 0 plus `points` log-spaced frequencies on [lo, hi] rad/s.
std::vector<double> default_omega_grid(int points = 2000, double lo = 1e-4, double hi = 1e4);

struct SpectralResult {
  double min_sigma = 0.0;       // min over the grid of sigma_min(G - j w I)
  double omega_at_min = 0.0;
  double margin = 0.0;          // min_sigma - gamma
  double min_eig_distance = 0.0;  // min over grid of min_i |lambda_i(G - j w I)|
  double eig_margin = 0.0;        // min_eig_distance - gamma
};

struct SpectralOptions {
  OutputMap map = OutputMap::MeasuredRow;
  std::optional<VectorXd> linearization_x;
};

/// Frequency condition on G - j w I_{3n}. The minimum singular value is the
/// primary realization; the eigenvalue-modulus variant is reported alongside.
SpectralResult check_spectral_condition(const PackModel& model, const ObserverGain& gain,
                                        double gamma, const std::vector<double>& omega_grid,
                                        const SpectralOptions& opts = {});

struct GainValidityOptions {
  LipschitzRegion region;
  int lipschitz_samples = 256;
  std::uint64_t seed = 1;
  std::vector<double> omega_grid;  // empty: default_omega_grid()
  OutputMap map = OutputMap::MeasuredRow;
  /// Linearize the OCV terms into G. Without it the SOC columns of A and H
  /// are zero and G~ always has eigenvalues at the origin.
  bool linearize = true;
  /// Linearization point; defaults to the region centre with relaxed RC pairs.
  std::optional<VectorXd> operating_point;
  /// Per-SOC grid resolution for checking G~ stability across the region.
  int stability_grid = 5;
};

struct GainValidityReport {
  bool impulse_obs = false;
  Eigen::VectorXcd g_tilde_eigs;
  bool g_tilde_stable = false;
  double g_tilde_worst_abscissa = 0.0;
  double g22_condition = 0.0;
  double gamma_hat = 0.0;
  double min_sigma = 0.0;
  double omega_at_min = 0.0;
  double spectral_margin = 0.0;
  double eig_margin = 0.0;
  bool verdict = false;
  VectorXd operating_point;
};

GainValidityReport validate_gain(const PackModel& model, const ObserverGain& gain,
                                 const GainValidityOptions& opts = {});

/// Validity of scalar multiples of a gain; the caller reads off the frontier.
std::vector<std::pair<double, GainValidityReport>> sweep_gain_scale(
    const PackModel& model, const ObserverGain& gain, const std::vector<double>& scales,
    const GainValidityOptions& opts = {});

struct Measurement {
  double t = 0.0;
  double y = 0.0;        // terminal voltage [V]
  double i_total = 0.0;  // total current [A], held until the next sample
};

/// Noise-free measurement stream of a simulated trajectory.
std::vector<Measurement> measurements_from(const Trajectory& traj);

struct ObserverStepResult {
  VectorXd xhat_next;
  VectorXd uhat;
  double yhat = 0.0;
  double innovation = 0.0;
};

struct EstimateTrajectory {
  std::vector<double> times;
  std::vector<VectorXd> xhat;
  std::vector<VectorXd> uhat;
  std::vector<double> yhat;
  std::vector<double> innovation;
  /// True for samples reached across a gap in the measurement stream.
  std::vector<bool> bridged;

  std::size_t size() const { return times.size(); }
};

struct ObserverRunOptions {
  double nominal_dt = 0.0;  // 0: smallest interval in the stream
  double gap_factor = 1.5;  // intervals above gap_factor * nominal_dt are gaps
};

/// Descriptor observer with linear output-error injection,
///   E w^' = A w^ + theta(w^) + K (y - H w^ - phi(w^)).
///
/// The algebraic rows are solved with G22 = A22 - K_u h_u. Between samples
/// the innovation and the total current are held; the differential states
/// then follow x^' = A11 x^ + A12 u^(x^) + K_x nu with u^ from the algebraic
/// rows at the held innovation, integrated with RK4. When the estimate equals
/// the plant state the innovation is zero and the step coincides with the
/// plant step.
class Observer {
 public:
  /// Throws SingularG22 if A22 - K_u h_u is singular.
  Observer(PackModel model, ObserverGain gain);

  const PackModel& model() const { return model_; }
  const ObserverGain& gain() const { return gain_; }

  struct Correction {
    VectorXd uhat;
    double yhat = 0.0;
    double innovation = 0.0;
  };

  /// Algebraic estimate, predicted output and innovation at a sample.
  Correction correct(const VectorXd& xhat, double y_meas, double i_total) const;

  ObserverStepResult step(const VectorXd& xhat, double y_meas, double i_total, double dt) const;

  EstimateTrajectory run(const VectorXd& xhat0, std::span<const Measurement> measurements,
                         const ObserverRunOptions& opts = {}) const;

 private:
  VectorXd held_rhs(const VectorXd& xhat, double innovation, double i_total) const;

  PackModel model_;
  ObserverGain gain_;
  RowVectorXd h_x_, h_u_;
  Eigen::PartialPivLU<MatrixXd> g22_lu_;
};

ObserverStepResult observer_step(const PackModel& model, const ObserverGain& gain,
                                 const VectorXd& xhat, double y_meas, double i_total, double dt);

}  // namespace parcell
