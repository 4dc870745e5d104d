#include "parcell/observer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "parcell/errors.hpp"
#include "parcell/linalg.hpp"
#include "parcell/number_format.hpp"
#include "parcell/observability.hpp"
#include "parcell/rk4.hpp"

namespace parcell {

namespace {

constexpr double kSingularCondition = 1e12;

void check_gain_size(const PackModel& model, const ObserverGain& gain) {
  if (gain.k().size() != model.nw()) {
    throw Error(ErrorCode::InvalidArgument, "gain has length " + std::to_string(gain.k().size()) +
                                                ", expected " + std::to_string(model.nw()));
  }
}

double condition_number(const MatrixXd& m) {
  const VectorXd sv = singular_values(m);
  const double lo = sv(sv.size() - 1);
  return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

/// Output row used in G, with the OCV slope of the measured cells folded in
/// when linearizing.
RowVectorXd output_row(const PackModel& model, const std::optional<VectorXd>& lin_x,
                       OutputMap map) {
  MatrixXd h = model.h_mat();
  if (lin_x) h += phi_jacobian(model, *lin_x);
  if (map == OutputMap::CellAverage) return h.colwise().mean();
  return h.row(0);
}

MatrixXd state_matrix(const PackModel& model, const std::optional<VectorXd>& lin_x) {
  if (!lin_x) return model.a_mat();
  return model.a_mat() + theta_jacobian(model, *lin_x);
}

VectorXd region_centre(const PackModel& model, const LipschitzRegion& r) {
  VectorXd x(model.nx());
  for (int k = 0; k < model.n(); ++k) {
    x(2 * k) = 0.5 * (r.z_lo + r.z_hi);
    x(2 * k + 1) = 0.0;
  }
  return x;
}

}  // namespace

ObserverGain::ObserverGain(VectorXd k) : k_(std::move(k)) {
  if (k_.size() < 6 || k_.size() % 3 != 0) {
    throw Error(ErrorCode::InvalidArgument, "observer gain must have length 3n with n >= 2");
  }
  if (!k_.allFinite()) throw Error(ErrorCode::InvalidArgument, "observer gain is not finite");
}

RowVectorXd measured_row(const PackModel& model) { return model.h_mat().row(0); }

ErrorMatrices build_error_matrices(const PackModel& model, const ObserverGain& gain,
                                   const std::optional<VectorXd>& linearization_x, OutputMap map) {
  check_gain_size(model, gain);
  const int nx = model.nx();
  const int n = model.n();
  ErrorMatrices em;
  em.g = state_matrix(model, linearization_x) -
         gain.k() * output_row(model, linearization_x, map);
  em.g11 = em.g.topLeftCorner(nx, nx);
  em.g12 = em.g.topRightCorner(nx, n);
  em.g21 = em.g.bottomLeftCorner(n, nx);
  em.g22 = em.g.bottomRightCorner(n, n);
  em.g22_condition = condition_number(em.g22);
  if (!(em.g22_condition < kSingularCondition)) {
    throw Error(ErrorCode::SingularG22,
                "G22 = A22 - K_u H_u is singular (condition " + format_double(em.g22_condition) + ")");
  }
  em.g_tilde = em.g11 - em.g12 * em.g22.partialPivLu().solve(em.g21);
  em.g_tilde_eigs = Eigen::EigenSolver<MatrixXd>(em.g_tilde, false).eigenvalues();
  return em;
}

LipschitzEstimate estimate_lipschitz(const PackModel& model, const ObserverGain& gain,
                                     const LipschitzRegion& region, int n_samples,
                                     std::uint64_t seed,
                                     const std::optional<VectorXd>& linearization_x) {
  if (n_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  if (!(region.z_lo >= 0.0 && region.z_hi <= 1.0 && region.z_lo <= region.z_hi &&
        region.vc_lo <= region.vc_hi)) {
    throw Error(ErrorCode::InvalidArgument, "Lipschitz region must lie inside [0, 1] in SOC");
  }
  const ErrorMatrices em = build_error_matrices(model, gain, linearization_x);
  const int n = model.n();
  const int nx = model.nx();

  // G12 G22^-1 appears in both terms.
  const MatrixXd m = em.g22.transpose().partialPivLu().solve(em.g12.transpose()).transpose();
  const VectorXd phi_gain = m * gain.k_u() - gain.k_x();

  // Linear terms already inside G: Jacobians at the linearization point.
  MatrixXd theta_u_lin = MatrixXd::Zero(n, nx);
  double phi_lin = 0.0;
  if (linearization_x) {
    theta_u_lin = theta_jacobian(model, *linearization_x).bottomLeftCorner(n, nx);
    phi_lin = model.cell(0).curve().derivative((*linearization_x)(0), 1);
  }

  auto f_eval = [&](const VectorXd& x) -> VectorXd {
    const VectorXd th = model.theta_ocv(x) - theta_u_lin * x;
    const double ph = model.cell(0).curve().value(x(0)) - phi_lin * x(0);
    return -m * th + phi_gain * ph;
  };
  auto f_jac = [&](const VectorXd& x) -> MatrixXd {
    const MatrixXd jt = theta_jacobian(model, x).bottomLeftCorner(n, nx) - theta_u_lin;
    MatrixXd jp = MatrixXd::Zero(1, nx);
    jp(0, 0) = model.cell(0).curve().derivative(x(0), 1) - phi_lin;
    return -m * jt + phi_gain * jp;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VectorXd> xs;
  std::vector<VectorXd> fs;
  LipschitzEstimate est;
  est.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    VectorXd x(nx);
    for (int k = 0; k < n; ++k) {
      x(2 * k) = region.z_lo + (region.z_hi - region.z_lo) * unit(rng);
      x(2 * k + 1) = region.vc_lo + (region.vc_hi - region.vc_lo) * unit(rng);
    }
    const VectorXd fx = f_eval(x);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double dx = (x - xs[j]).norm();
      if (dx > 0.0) est.pair_estimate = std::max(est.pair_estimate, (fx - fs[j]).norm() / dx);
    }
    est.jacobian_estimate = std::max(est.jacobian_estimate, singular_values(f_jac(x))(0));
    xs.push_back(std::move(x));
    fs.push_back(fx);
  }
  est.gamma_hat = std::max(est.pair_estimate, est.jacobian_estimate);
  return est;
}

std::vector<double> default_omega_grid(int points, double lo, double hi) {
  std::vector<double> grid{0.0};
  if (points < 1) return grid;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid.push_back(std::pow(10.0, a + (b - a) * frac));
  }
  return grid;
}

SpectralResult check_spectral_condition(const PackModel& model, const ObserverGain& gain,
                                        double gamma, const std::vector<double>& omega_grid,
                                        const SpectralOptions& opts) {
  check_gain_size(model, gain);
  if (omega_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty frequency grid");
  const MatrixXd g = state_matrix(model, opts.linearization_x) -
                     gain.k() * output_row(model, opts.linearization_x, opts.map);
  const Eigen::Index nw = g.rows();
  const Eigen::VectorXcd eigs = Eigen::EigenSolver<MatrixXd>(g, false).eigenvalues();
  const Eigen::MatrixXcd gc = g.cast<std::complex<double>>();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(nw, nw);

  SpectralResult res;
  res.min_sigma = std::numeric_limits<double>::infinity();
  res.min_eig_distance = std::numeric_limits<double>::infinity();
  for (double w : omega_grid) {
    if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "frequency grid must be non-negative");
    const std::complex<double> jw(0.0, w);
    const VectorXd sv = singular_values(Eigen::MatrixXcd(gc - jw * eye));
    const double smin = sv(sv.size() - 1);
    if (smin < res.min_sigma) {
      res.min_sigma = smin;
      res.omega_at_min = w;
    }
    // Eigenvalues of G - jwI are those of G shifted by -jw.
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
      res.min_eig_distance = std::min(res.min_eig_distance, std::abs(eigs(i) - jw));
    }
  }
  res.margin = res.min_sigma - gamma;
  res.eig_margin = res.min_eig_distance - gamma;
  return res;
}

GainValidityReport validate_gain(const PackModel& model, const ObserverGain& gain,
                                 const GainValidityOptions& opts) {
  check_gain_size(model, gain);
  const int n = model.n();
  GainValidityReport rep;

  MatrixXd stacked(2 * n, n);
  stacked << model.a22(), model.hu();
  rep.impulse_obs = numerical_rank(stacked) == n;

  std::optional<VectorXd> lin;
  if (opts.linearize) lin = opts.operating_point.value_or(region_centre(model, opts.region));
  rep.operating_point = opts.operating_point.value_or(region_centre(model, opts.region));

  const ErrorMatrices em = build_error_matrices(model, gain, lin, opts.map);
  rep.g_tilde_eigs = em.g_tilde_eigs;
  rep.g22_condition = em.g22_condition;
  rep.g_tilde_worst_abscissa = spectral_abscissa(em.g_tilde_eigs);

  // G~ depends on the OCV slopes, so check it across an SOC grid as well.
  if (lin && opts.stability_grid > 1) {
    int per_axis = opts.stability_grid;
    while (per_axis > 2 && std::pow(per_axis, n) > 4096) --per_axis;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    VectorXd x = VectorXd::Zero(model.nx());
    const double span = opts.region.z_hi - opts.region.z_lo;
    for (;;) {
      for (int k = 0; k < n; ++k) {
        x(2 * k) = opts.region.z_lo + span * idx[static_cast<std::size_t>(k)] / (per_axis - 1);
      }
      const ErrorMatrices e = build_error_matrices(model, gain, x, opts.map);
      rep.g_tilde_worst_abscissa =
          std::max(rep.g_tilde_worst_abscissa, spectral_abscissa(e.g_tilde_eigs));
      int k = 0;
      while (k < n && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == n) break;
    }
  }
  rep.g_tilde_stable = rep.g_tilde_worst_abscissa < 0.0;

  rep.gamma_hat =
      estimate_lipschitz(model, gain, opts.region, opts.lipschitz_samples, opts.seed, lin).gamma_hat;
  const std::vector<double> grid = opts.omega_grid.empty() ? default_omega_grid() : opts.omega_grid;
  const SpectralResult sp = check_spectral_condition(model, gain, rep.gamma_hat, grid,
                                                     SpectralOptions{opts.map, lin});
  rep.min_sigma = sp.min_sigma;
  rep.omega_at_min = sp.omega_at_min;
  rep.spectral_margin = sp.margin;
  rep.eig_margin = sp.eig_margin;
  rep.verdict = rep.impulse_obs && rep.g_tilde_stable && rep.spectral_margin > 0.0;
  return rep;
}

std::vector<std::pair<double, GainValidityReport>> sweep_gain_scale(
    const PackModel& model, const ObserverGain& gain, const std::vector<double>& scales,
    const GainValidityOptions& opts) {
  std::vector<std::pair<double, GainValidityReport>> out;
  for (double s : scales) {
    try {
      out.emplace_back(s, validate_gain(model, ObserverGain(gain.k() * s), opts));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularG22) throw;
      out.emplace_back(s, GainValidityReport{});
    }
  }
  return out;
}

std::vector<Measurement> measurements_from(const Trajectory& traj) {
  std::vector<Measurement> m(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    m[k] = {traj.times[k], traj.terminal_voltage[k], traj.total_current[k]};
  }
  return m;
}

Observer::Observer(PackModel model, ObserverGain gain)
    : model_(std::move(model)), gain_(std::move(gain)) {
  check_gain_size(model_, gain_);
  const RowVectorXd row = measured_row(model_);
  h_x_ = row.head(model_.nx());
  h_u_ = row.tail(model_.n());
  const MatrixXd g22 = MatrixXd(model_.a22()) - gain_.k_u() * h_u_;
  const double cond = condition_number(g22);
  if (!(cond < kSingularCondition)) {
    throw Error(ErrorCode::SingularG22,
                "G22 = A22 - K_u H_u is singular (condition " + format_double(cond) + ")");
  }
  g22_lu_.compute(g22);
}

Observer::Correction Observer::correct(const VectorXd& xhat, double y_meas, double i_total) const {
  const double ocv1 = model_.cell(0).curve().value(xhat(0));
  const VectorXd rhs = -(model_.a21() * xhat) - model_.theta_u(xhat, i_total) -
                       gain_.k_u() * (y_meas - h_x_.dot(xhat) - ocv1);
  Correction c;
  c.uhat = g22_lu_.solve(rhs);
  c.yhat = h_x_.dot(xhat) + h_u_.dot(c.uhat) + ocv1;
  c.innovation = y_meas - c.yhat;
  return c;
}

VectorXd Observer::held_rhs(const VectorXd& xhat, double innovation, double i_total) const {
  const VectorXd u = -model_.a22_solve(VectorXd(model_.a21() * xhat +
                                                model_.theta_u(xhat, i_total) +
                                                gain_.k_u() * innovation));
  return model_.a11() * xhat + model_.a12() * u + gain_.k_x() * innovation;
}

ObserverStepResult Observer::step(const VectorXd& xhat, double y_meas, double i_total,
                                  double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const Correction c = correct(xhat, y_meas, i_total);
  ObserverStepResult r;
  r.uhat = c.uhat;
  r.yhat = c.yhat;
  r.innovation = c.innovation;
  r.xhat_next = rk4_step([&](const VectorXd& s) { return held_rhs(s, c.innovation, i_total); },
                         xhat, dt);
  if (!r.xhat_next.allFinite()) throw Error(ErrorCode::NonFinite, "observer state diverged");
  return r;
}

EstimateTrajectory Observer::run(const VectorXd& xhat0, std::span<const Measurement> meas,
                                 const ObserverRunOptions& opts) const {
  if (xhat0.size() != model_.nx()) {
    throw Error(ErrorCode::InvalidArgument, "xhat0 must have length 2n");
  }
  double nominal = opts.nominal_dt;
  for (std::size_t k = 1; k < meas.size(); ++k) {
    const double d = meas[k].t - meas[k - 1].t;
    if (!(d > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "measurement timestamps must be strictly increasing (index " +
                      std::to_string(k) + ")");
    }
    if (opts.nominal_dt <= 0.0) nominal = (k == 1) ? d : std::min(nominal, d);
  }

  EstimateTrajectory est;
  est.times.reserve(meas.size());
  VectorXd x = xhat0;
  bool gap_before = false;
  for (std::size_t k = 0; k < meas.size(); ++k) {
    const Measurement& m = meas[k];
    const Correction c = correct(x, m.y, m.i_total);
    est.times.push_back(m.t);
    est.xhat.push_back(x);
    est.uhat.push_back(c.uhat);
    est.yhat.push_back(c.yhat);
    est.innovation.push_back(c.innovation);
    est.bridged.push_back(gap_before);
    if (k + 1 == meas.size()) break;

    const double span = meas[k + 1].t - m.t;
    gap_before = nominal > 0.0 && span > opts.gap_factor * nominal;
    // Across a gap the last sample is held and integrated in nominal steps.
    const int sub = gap_before ? static_cast<int>(std::ceil(span / nominal - 1e-9)) : 1;
    const double h = span / sub;
    auto rhs = [&](const VectorXd& s) { return held_rhs(s, c.innovation, m.i_total); };
    for (int j = 0; j < sub; ++j) x = rk4_step(rhs, x, h);
    if (!x.allFinite()) {
      throw Error(ErrorCode::NonFinite, "observer state diverged at t = " + format_double(meas[k + 1].t));
    }
  }
  return est;
}

ObserverStepResult observer_step(const PackModel& model, const ObserverGain& gain,
                                 const VectorXd& xhat, double y_meas, double i_total, double dt) {
  return Observer(model, gain).step(xhat, y_meas, i_total, dt);
}

}  // namespace parcell
