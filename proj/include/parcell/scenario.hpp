#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "parcell/config.hpp"
#include "parcell/drive_cycle.hpp"
#include "parcell/observability.hpp"
#include "parcell/observer.hpp"
#include "parcell/plant_sim.hpp"

namespace parcell {

struct CycleSpec {
  enum class Kind { File, Synthetic, Constant };
  Kind kind = Kind::Synthetic;
  std::filesystem::path file;  // absolute after loading
  double amplitude_a = 20.0;   // synthetic
  double current_a = 0.0;      // constant
  double duration_s = 1400.0;
  std::uint64_t seed = 1;
};

DriveCycle make_cycle(const CycleSpec& spec);

struct ObserverSpec {
  bool enabled = false;
  VectorXd gain;
  /// Either an explicit initial estimate or per-cell offsets added to the
  /// plant SOCs (RC voltages start at the plant values).
  std::optional<VectorXd> xhat0;
  std::vector<double> soc_offsets;
};

struct Scenario {
  std::string name = "scenario";
  PackConfig pack;
  CycleSpec cycle;
  std::optional<VectorXd> x0;  // default: rest_state(pack.z0)
  double dt_s = 0.1;
  double t_end_s = 0.0;        // 0: end of the cycle
  ObserverSpec observer;
  bool analyze = true;
  std::filesystem::path output_dir;  // empty: caller decides
};

/// Scenario JSON. "pack" is either an inline pack config or a path to one;
/// relative paths are resolved against the scenario file's directory.
///   { "name", "pack", "cycle": {"kind": "synthetic", "amplitude_a", "duration_s", "seed"}
///                            | {"kind": "file", "path"} | {"kind": "constant", "current_a", "duration_s"},
///     "x0"?, "dt_s"?, "t_end_s"?, "analyze"?, "output_dir"?,
///     "observer"?: {"enabled", "gain", "xhat0"? | "soc_offsets"?} }
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir,
                        const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

VectorXd initial_state(const Scenario& s);
VectorXd initial_estimate(const Scenario& s);

struct ScenarioSummary {
  std::string name;
  int n = 0;
  std::size_t samples = 0;
  double t_final = 0.0;
  std::vector<std::string> warnings;
  std::optional<Verdict> observability;

  double max_kcl = 0.0;
  double max_kvl = 0.0;
  /// Fraction of samples with |I| above 5% of its peak where every branch
  /// current has the sign of the total current.
  double sign_agreement = 1.0;
  std::vector<double> mean_abs_current;
  int highest_r1_cell = 0;          // zero-based
  double highest_r1_share = 0.0;    // its share of the summed mean |I_k|

  bool observer_ran = false;
  std::optional<double> convergence_time;  // first t after which ||z^ - z||_inf < 0.01 for good
  std::vector<double> final_soc_error;
  std::vector<double> final_vc_error;
  std::vector<double> final_current_error;
  std::optional<bool> gain_valid;
};

inline constexpr double kConvergenceThreshold = 0.01;

/// Statistics from a plant trajectory and, optionally, the matching
/// estimates. Only uses what the CSV outputs contain.
ScenarioSummary summarize(const PackModel& model, const Trajectory& traj,
                          const EstimateTrajectory* est = nullptr);

/// First sample time after which ||z^ - z||_inf stays below the threshold.
std::optional<double> convergence_time(const Trajectory& traj, const EstimateTrajectory& est,
                                       double threshold = kConvergenceThreshold);

/// Runs the scenario and writes trajectory.csv, estimates.csv (observer on),
/// observability.json (analyze on), validity.json (observer on) and
/// summary.json into out_dir. Warnings are passed to on_warning as soon as
/// they arise (the observability warning before anything is simulated) and
/// are also collected in the summary. A diverging observer is reported as a
/// warning; the plant outputs are still written.
ScenarioSummary run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                             const std::function<void(const std::string&)>& on_warning = {});

std::string to_json(const ScenarioSummary& summary);

}  // namespace parcell
