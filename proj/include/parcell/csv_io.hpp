#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "parcell/drive_cycle.hpp"
#include "parcell/observer.hpp"
#include "parcell/plant_sim.hpp"

namespace parcell {

// Drive cycle: header `t_s,i_a`, one sample per row.
DriveCycle parse_drive_cycle(std::istream& in, const std::string& source = "<stream>",
                             CycleInterp interp = CycleInterp::ZeroOrderHold);
DriveCycle load_drive_cycle(const std::filesystem::path& path,
                            CycleInterp interp = CycleInterp::ZeroOrderHold);
void write_drive_cycle(const DriveCycle& cycle, std::ostream& out);
void write_drive_cycle(const DriveCycle& cycle, const std::filesystem::path& path);

// Trajectory: `t_s,z_1..z_n,vc_1..vc_n,i_1..i_n,v_terminal`. Loading restores
// times, states and terminal voltage; the total current is rebuilt as the sum
// of the branch currents.
void write_trajectory(const Trajectory& traj, std::ostream& out);
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory parse_trajectory(std::istream& in, const std::string& source = "<stream>");
Trajectory load_trajectory(const std::filesystem::path& path);

// Estimates: `t_s,z_hat_1..,vc_hat_1..,i_hat_1..,y_hat,innovation`.
void write_estimates(const EstimateTrajectory& est, std::ostream& out);
void write_estimates(const EstimateTrajectory& est, const std::filesystem::path& path);
EstimateTrajectory parse_estimates(std::istream& in, const std::string& source = "<stream>");
EstimateTrajectory load_estimates(const std::filesystem::path& path);

}  // namespace parcell
