#pragma once

#include <vector>

#include "parcell/drive_cycle.hpp"
#include "parcell/pack_model.hpp"

namespace parcell {

/// A cell's SOC left (or re-entered) [0, 1]. Simulation continues unless the
/// hard-stop option is set.
struct SocEvent {
  double t = 0.0;
  int cell = 0;
  double z = 0.0;
  bool exited = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PackState> states;
  std::vector<double> terminal_voltage;
  /// Total current applied from each sample to the next.
  std::vector<double> total_current;
  std::vector<SocEvent> soc_events;
  bool stopped_early = false;

  std::size_t size() const { return times.size(); }
  int n() const { return states.empty() ? 0 : static_cast<int>(states.front().u.size()); }
};

struct SimOptions {
  double dt = 0.1;
  double t_end = 0.0;
  bool hard_stop_soc = false;
};

/// Fixed-step RK4 integration of the reduced model. The total current is
/// sampled from the cycle at the start of each step and held over it, so the
/// stored (t, I) pairs fully determine the input. Branch currents and the
/// terminal voltage are recomputed from the algebraic solution at every
/// stored sample.
Trajectory simulate(const PackModel& model, const VectorXd& x0, const DriveCycle& cycle,
                    const SimOptions& opts);

inline Trajectory simulate(const PackModel& model, const VectorXd& x0, const DriveCycle& cycle,
                           double dt, double t_end) {
  return simulate(model, x0, cycle, SimOptions{dt, t_end, false});
}

/// Initial differential state with the given SOCs and relaxed RC pairs.
VectorXd rest_state(const std::vector<double>& z0);

}  // namespace parcell
