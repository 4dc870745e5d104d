// parcell command-line front end.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "parcell/config.hpp"
#include "parcell/csv_io.hpp"
#include "parcell/errors.hpp"
#include "parcell/observability.hpp"
#include "parcell/observer.hpp"
#include "parcell/reports.hpp"
#include "parcell/scenario.hpp"

namespace fs = std::filesystem;
using namespace parcell;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitWarning = 4;

fs::path default_output_dir() {
  const char* env = std::getenv("PARCELL_OUTPUT_DIR");
  return (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("parcell_out");
}

fs::path output_path(const std::string& given, const std::string& fallback_name) {
  fs::path p = given.empty() ? default_output_dir() / fallback_name : fs::path(given);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + p.string() + " for writing");
  out << text;
}

struct CycleArgs {
  std::string file;
  double amplitude = 20.0;
  double duration = 1400.0;
  std::uint64_t seed = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--cycle", file, "Drive-cycle CSV (t_s,i_a); synthetic cycle if omitted");
    cmd->add_option("--amplitude", amplitude, "Synthetic cycle peak |I| [A]")->capture_default_str();
    cmd->add_option("--duration", duration, "Synthetic cycle length [s]")->capture_default_str();
    cmd->add_option("--seed", seed, "Synthetic cycle seed")->capture_default_str();
  }
  DriveCycle make() const {
    return file.empty() ? synth_udds_like(amplitude, duration, seed) : load_drive_cycle(file);
  }
};

VectorXd state_or_rest(const std::string& csv, const PackConfig& cfg) {
  if (csv.empty()) return rest_state(cfg.z0);
  VectorXd x = parse_csv_vector(csv);
  if (x.size() != static_cast<Eigen::Index>(2 * cfg.cells.size())) {
    throw Error(ErrorCode::ConfigError, "state vector must have length 2n = " +
                                            std::to_string(2 * cfg.cells.size()));
  }
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel Li-ion cell pack: simulation, observability analysis and SOC/current observer"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict", strict, "Treat observability or gain-validity warnings as errors (exit 4)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate the plant and write the trajectory CSV");
  std::string sim_pack, sim_x0, sim_out, sim_dump;
  double sim_dt = 0.1, sim_tend = 0.0;
  CycleArgs sim_cycle;
  sim->add_option("--pack", sim_pack, "Pack config JSON")->required();
  sim_cycle.add_to(sim);
  sim->add_option("--x0", sim_x0, "Initial state z1,vc1,...,zn,vcn (default: config z0, vc = 0)");
  sim->add_option("--dt", sim_dt, "Integration step [s]")->capture_default_str();
  sim->add_option("--t-end", sim_tend, "Horizon [s] (default: end of cycle)");
  sim->add_option("--out", sim_out, "Trajectory CSV (default: $PARCELL_OUTPUT_DIR/trajectory.csv)");
  sim->add_option("--dump-matrices", sim_dump, "Also write E, A, H as plain text");

  // estimate
  auto* est = app.add_subcommand("estimate", "Run the observer on simulated or recorded measurements");
  std::string est_pack, est_gain, est_xhat0, est_x0, est_out, est_traj;
  double est_dt = 0.1, est_tend = 0.0;
  CycleArgs est_cycle;
  est->add_option("--pack", est_pack, "Pack config JSON")->required();
  est_cycle.add_to(est);
  est->add_option("--trajectory", est_traj, "Use a trajectory CSV as the measurement source");
  est->add_option("--gain", est_gain, "Observer gain, 3n comma-separated values")->required();
  est->add_option("--xhat0", est_xhat0, "Initial estimate, 2n values (default: plant x0)");
  est->add_option("--x0", est_x0, "Plant initial state, 2n values (default: config z0)");
  est->add_option("--dt", est_dt, "Plant step and sample interval [s]")->capture_default_str();
  est->add_option("--t-end", est_tend, "Horizon [s] (default: end of cycle)");
  est->add_option("--out", est_out, "Estimates CSV (default: $PARCELL_OUTPUT_DIR/estimates.csv)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Local observability report at a state");
  std::string ana_pack, ana_x0, ana_out, ana_test = "both", ana_method = "taylor";
  int ana_order = 2;
  double ana_rank_tol = kDefaultRankTol, ana_current = 0.0;
  ana->add_option("--pack", ana_pack, "Pack config JSON")->required();
  ana->add_option("--x0", ana_x0, "State z1,vc1,...,zn,vcn (default: config z0, vc = 0)");
  ana->add_option("--test", ana_test, "linearized | lie | both")
      ->check(CLI::IsMember({"linearized", "lie", "both"}))
      ->capture_default_str();
  ana->add_option("--max-order", ana_order, "Highest Lie derivative order")
      ->check(CLI::Range(0, kMaxLieOrder))
      ->capture_default_str();
  ana->add_option("--method", ana_method, "taylor | fd")->check(CLI::IsMember({"taylor", "fd"}))->capture_default_str();
  ana->add_option("--rank-tol", ana_rank_tol, "Relative singular-value threshold")->capture_default_str();
  ana->add_option("--current", ana_current, "Total current at the linearization point [A]");
  ana->add_option("--out", ana_out, "Write the JSON report here instead of stdout");

  // validate-gain
  auto* val = app.add_subcommand("validate-gain", "Check an observer gain against the convergence conditions");
  std::string val_pack, val_gain, val_out, val_map = "measured", val_sweep;
  int val_samples = 256;
  std::uint64_t val_seed = 1;
  val->add_option("--pack", val_pack, "Pack config JSON")->required();
  val->add_option("--gain", val_gain, "Observer gain, 3n comma-separated values")->required();
  val->add_option("--samples", val_samples, "Lipschitz sample count")->capture_default_str();
  val->add_option("--seed", val_seed, "Lipschitz sampling seed")->capture_default_str();
  val->add_option("--output-map", val_map, "measured | average")
      ->check(CLI::IsMember({"measured", "average"}))
      ->capture_default_str();
  val->add_option("--sweep", val_sweep, "Comma-separated gain scale factors to report");
  val->add_option("--out", val_out, "Write the JSON report here instead of stdout");

  // batch
  auto* bat = app.add_subcommand("batch", "Run scenario files in parallel");
  std::vector<std::string> bat_files;
  std::string bat_out;
  unsigned bat_jobs = std::max(1u, std::thread::hardware_concurrency());
  bat->add_option("scenarios", bat_files, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  bat->add_option("--out", bat_out, "Output root; each scenario writes to <root>/<name>");
  bat->add_option("--jobs,-j", bat_jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    bool warned = false;

    if (*sim) {
      const PackConfig cfg = load_pack_config(sim_pack);
      const PackModel model = assemble(cfg);
      const DriveCycle cycle = sim_cycle.make();
      const Trajectory traj = simulate(model, state_or_rest(sim_x0, cfg), cycle, sim_dt,
                                       sim_tend > 0.0 ? sim_tend : cycle.t_end());
      const fs::path out = output_path(sim_out, "trajectory.csv");
      write_trajectory(traj, out);
      if (!sim_dump.empty()) {
        std::ofstream d(output_path(sim_dump, "matrices.txt"));
        write_matrix_dump(model, d);
      }
      for (const auto& e : traj.soc_events) {
        if (e.exited) {
          std::cerr << "warning: cell " << e.cell + 1 << " left the SOC range at t = " << e.t << " s\n";
          warned = true;
        }
      }
      std::cout << "wrote " << traj.size() << " samples to " << out.string() << "\n";
    } else if (*est) {
      const PackConfig cfg = load_pack_config(est_pack);
      const PackModel model = assemble(cfg);
      const ObserverGain gain(parse_csv_vector(est_gain));
      if (gain.k().size() != model.nw()) {
        throw Error(ErrorCode::ConfigError, "gain must have length 3n = " + std::to_string(model.nw()));
      }
      Trajectory traj;
      if (!est_traj.empty()) {
        traj = load_trajectory(est_traj);
        if (traj.n() != model.n()) throw Error(ErrorCode::ConfigError, "trajectory has a different cell count");
      } else {
        const DriveCycle cycle = est_cycle.make();
        traj = simulate(model, state_or_rest(est_x0, cfg), cycle, est_dt,
                        est_tend > 0.0 ? est_tend : cycle.t_end());
      }
      const VectorXd xhat0 = est_xhat0.empty() ? traj.states.front().x : state_or_rest(est_xhat0, cfg);

      const ObservabilityReport obs_rep = analyze_observability(model, xhat0);
      if (obs_rep.verdict == Verdict::Unobservable) {
        std::cerr << "warning: pack is Unobservable at the initial estimate\n";
        warned = true;
      }
      const GainValidityReport vr = validate_gain(model, gain);
      if (!vr.verdict) {
        std::cerr << "warning: gain does not pass the sufficient convergence conditions\n";
        warned = true;
      }
      const Observer observer(model, gain);
      const auto meas = measurements_from(traj);
      const EstimateTrajectory e = observer.run(xhat0, meas);
      const fs::path out = output_path(est_out, "estimates.csv");
      write_estimates(e, out);
      fs::path sidecar = out;
      sidecar.replace_extension(".validity.json");
      write_file(sidecar, to_json(vr));
      std::cout << "wrote " << e.size() << " estimates to " << out.string() << " and "
                << sidecar.string() << "\n";
    } else if (*ana) {
      const PackConfig cfg = load_pack_config(ana_pack);
      const PackModel model = assemble(cfg);
      ObservabilityOptions opts;
      opts.test = ana_test == "linearized" ? ObservabilityTest::Linearized
                  : ana_test == "lie"      ? ObservabilityTest::Lie
                                           : ObservabilityTest::Both;
      opts.lie.max_order = ana_order;
      opts.lie.method = ana_method == "fd" ? LieMethod::CentralDifference : LieMethod::Taylor;
      opts.rank_tol = ana_rank_tol;
      opts.i_total = ana_current;
      const ObservabilityReport rep = analyze_observability(model, state_or_rest(ana_x0, cfg), opts);
      if (ana_out.empty()) {
        std::cout << to_json(rep);
      } else {
        write_file(output_path(ana_out, "observability.json"), to_json(rep));
      }
      warned = rep.verdict != Verdict::Observable;
    } else if (*val) {
      const PackConfig cfg = load_pack_config(val_pack);
      const PackModel model = assemble(cfg);
      const ObserverGain gain(parse_csv_vector(val_gain));
      if (gain.k().size() != model.nw()) {
        throw Error(ErrorCode::ConfigError, "gain must have length 3n = " + std::to_string(model.nw()));
      }
      GainValidityOptions opts;
      opts.lipschitz_samples = val_samples;
      opts.seed = val_seed;
      opts.map = val_map == "average" ? OutputMap::CellAverage : OutputMap::MeasuredRow;
      const GainValidityReport rep = validate_gain(model, gain, opts);
      std::string text = to_json(rep);
      if (!val_sweep.empty()) {
        const VectorXd scales = parse_csv_vector(val_sweep);
        std::string sweep = "[\n";
        const auto rows = sweep_gain_scale(model, gain, {scales.data(), scales.data() + scales.size()}, opts);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          sweep += "  {\"scale\": " + std::to_string(rows[i].first) +
                   ", \"verdict\": " + (rows[i].second.verdict ? "true" : "false") +
                   ", \"g_tilde_stable\": " + (rows[i].second.g_tilde_stable ? "true" : "false") +
                   ", \"spectral_margin\": " + std::to_string(rows[i].second.spectral_margin) + "}" +
                   (i + 1 < rows.size() ? ",\n" : "\n");
        }
        std::cerr << "scale sweep:\n" << sweep << "]\n";
      }
      if (val_out.empty()) {
        std::cout << text;
      } else {
        write_file(output_path(val_out, "validity.json"), text);
      }
      warned = !rep.verdict;
    } else if (*bat) {
      const fs::path root = bat_out.empty() ? default_output_dir() : fs::path(bat_out);
      std::vector<Scenario> scenarios;
      for (const auto& f : bat_files) scenarios.push_back(load_scenario(f));
      std::atomic<std::size_t> next{0};
      std::atomic<bool> any_warning{false};
      std::mutex io;
      int worst = kExitOk;
      auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
          const Scenario& sc = scenarios[i];
          const fs::path dir = sc.output_dir.empty() ? root / sc.name : sc.output_dir;
          try {
            const ScenarioSummary s = run_scenario(sc, dir, [&](const std::string& w) {
              std::lock_guard lock(io);
              std::cerr << "warning: " << sc.name << ": " << w << "\n";
              any_warning = true;
            });
            std::lock_guard lock(io);
            std::cout << sc.name << ": " << s.samples << " samples -> " << dir.string() << "\n";
          } catch (const Error& e) {
            std::lock_guard lock(io);
            std::cerr << "error: " << sc.name << ": " << e.what() << "\n";
            const bool config = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError ||
                                e.code() == ErrorCode::InvalidArgument;
            worst = std::max(worst, config ? kExitConfig : kExitNumerical);
          }
        }
      };
      std::vector<std::thread> pool;
      const unsigned jobs = std::min<unsigned>(bat_jobs, static_cast<unsigned>(scenarios.size()));
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      if (worst != kExitOk) return worst;
      warned = any_warning;
    }

    return (strict && warned) ? kExitWarning : kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::IoError:
      case ErrorCode::InvalidArgument:
        return kExitConfig;
      default:
        return kExitNumerical;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
