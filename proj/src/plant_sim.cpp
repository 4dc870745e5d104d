#include "parcell/plant_sim.hpp"

#include <cmath>
#include <string>

#include "parcell/errors.hpp"
#include "parcell/number_format.hpp"
#include "parcell/rk4.hpp"

namespace parcell {

namespace {

void check_soc(const VectorXd& x, double t, std::vector<bool>& outside,
               std::vector<SocEvent>& events) {
  for (std::size_t k = 0; k < outside.size(); ++k) {
    const double z = x(2 * static_cast<Eigen::Index>(k));
    const bool out = z < 0.0 || z > 1.0;
    if (out != outside[k]) {
      events.push_back({t, static_cast<int>(k), z, out});
      outside[k] = out;
    }
  }
}

}  // namespace

VectorXd rest_state(const std::vector<double>& z0) {
  VectorXd x = VectorXd::Zero(2 * static_cast<Eigen::Index>(z0.size()));
  for (std::size_t k = 0; k < z0.size(); ++k) x(2 * static_cast<Eigen::Index>(k)) = z0[k];
  return x;
}

Trajectory simulate(const PackModel& model, const VectorXd& x0, const DriveCycle& cycle,
                    const SimOptions& opts) {
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) {
    throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  }
  if (!(opts.t_end >= 0.0) || !std::isfinite(opts.t_end)) {
    throw Error(ErrorCode::InvalidArgument, "t_end must be finite and non-negative");
  }
  if (x0.size() != model.nx()) {
    throw Error(ErrorCode::InvalidArgument, "x0 has length " + std::to_string(x0.size()) +
                                                ", expected " + std::to_string(model.nx()));
  }
  if (!x0.allFinite()) throw Error(ErrorCode::NonFinite, "x0 is not finite");
  if (!cycle.covers(0.0, opts.t_end)) {
    throw Error(ErrorCode::CycleGap, "drive cycle spans [" + format_double(cycle.t_begin()) + ", " +
                                         format_double(cycle.t_end()) + "] but [0, " +
                                         format_double(opts.t_end) + "] was requested");
  }

  const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.terminal_voltage.reserve(steps + 1);
  traj.total_current.reserve(steps + 1);

  std::vector<bool> outside(static_cast<std::size_t>(model.n()), false);
  VectorXd x = x0;
  double t = 0.0;

  auto record = [&](double i_total) {
    PackState s{x, model.solve_algebraic(x, i_total), t};
    const VectorXd v = model.cell_voltages(s.x, s.u);
    traj.times.push_back(t);
    traj.terminal_voltage.push_back(v(0));
    traj.total_current.push_back(i_total);
    traj.states.push_back(std::move(s));
  };

  check_soc(x, t, outside, traj.soc_events);
  for (std::size_t k = 0; k < steps; ++k) {
    const double i_total = cycle.current_at(t);
    record(i_total);
    const double t_next = std::min(opts.t_end, static_cast<double>(k + 1) * opts.dt);
    const double h = t_next - t;
    x = rk4_step([&](const VectorXd& s) { return model.reduced_rhs(s, i_total); }, x, h);
    t = t_next;
    if (!x.allFinite()) {
      throw Error(ErrorCode::NonFinite, "plant state diverged at t = " + format_double(t));
    }
    check_soc(x, t, outside, traj.soc_events);
    if (opts.hard_stop_soc && !traj.soc_events.empty()) {
      traj.stopped_early = true;
      break;
    }
  }
  record(cycle.current_at(t));
  return traj;
}

}  // namespace parcell
