#include "parcell/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "config_json.hpp"
#include "parcell/csv_io.hpp"
#include "parcell/number_format.hpp"
#include "parcell/reports.hpp"

namespace parcell {

using detail::config_fail;
using detail::Json;

DriveCycle make_cycle(const CycleSpec& spec) {
  switch (spec.kind) {
    case CycleSpec::Kind::File:
      return load_drive_cycle(spec.file);
    case CycleSpec::Kind::Constant:
      return constant_cycle(spec.current_a, spec.duration_s);
    case CycleSpec::Kind::Synthetic:
      break;
  }
  return synth_udds_like(spec.amplitude_a, spec.duration_s, spec.seed);
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

CycleSpec cycle_from_json(const Json& j, const std::filesystem::path& base, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    config_fail(where, "cycle block needs a string 'kind' (\"synthetic\", \"file\" or \"constant\")");
  }
  CycleSpec c;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "file") {
    if (!j.contains("path") || !j["path"].is_string()) config_fail(where, "missing string 'path'");
    c.kind = CycleSpec::Kind::File;
    c.file = resolve(base, j["path"].get<std::string>());
    if (!std::filesystem::exists(c.file)) config_fail(where, "cycle file " + c.file.string() + " does not exist");
  } else if (kind == "synthetic") {
    c.kind = CycleSpec::Kind::Synthetic;
    c.amplitude_a = detail::number_or(j, "amplitude_a", c.amplitude_a, where);
    c.duration_s = detail::number_or(j, "duration_s", c.duration_s, where);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) config_fail(where, "'seed' must be a non-negative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
  } else if (kind == "constant") {
    c.kind = CycleSpec::Kind::Constant;
    c.current_a = detail::require_number(j, "current_a", where);
    c.duration_s = detail::require_number(j, "duration_s", where);
  } else {
    config_fail(where, "unknown cycle kind '" + kind + "'");
  }
  return c;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir,
                        const std::string& source) {
  const Json j = detail::parse_json(json_text, source);
  if (!j.is_object()) config_fail(source, "scenario must be a JSON object");
  Scenario s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_fail(source, "'name' must be a string");
    s.name = j["name"].get<std::string>();
  }
  if (!j.contains("pack")) config_fail(source, "missing key 'pack'");
  if (j["pack"].is_string()) {
    s.pack = load_pack_config(resolve(base_dir, j["pack"].get<std::string>()));
  } else {
    s.pack = detail::pack_from_json(j["pack"], source + ": pack");
  }
  const int n = static_cast<int>(s.pack.cells.size());

  if (!j.contains("cycle")) config_fail(source, "missing key 'cycle'");
  s.cycle = cycle_from_json(j["cycle"], base_dir, source + ": cycle");

  if (j.contains("x0")) {
    s.x0 = to_vector(detail::number_array(j["x0"], source + ": x0"));
    if (s.x0->size() != 2 * n) config_fail(source, "x0 must have length 2n = " + std::to_string(2 * n));
  }
  s.dt_s = detail::number_or(j, "dt_s", s.dt_s, source);
  s.t_end_s = detail::number_or(j, "t_end_s", s.t_end_s, source);
  if (!(s.dt_s > 0.0)) config_fail(source, "dt_s must be positive");
  if (j.contains("analyze")) s.analyze = j["analyze"].get<bool>();
  if (j.contains("output_dir")) s.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());

  if (j.contains("observer")) {
    const Json& o = j["observer"];
    const std::string where = source + ": observer";
    if (!o.is_object()) config_fail(where, "observer block must be an object");
    s.observer.enabled = o.value("enabled", true);
    if (s.observer.enabled) {
      if (!o.contains("gain")) config_fail(where, "missing key 'gain'");
      s.observer.gain = to_vector(detail::number_array(o["gain"], where + ".gain"));
      if (s.observer.gain.size() != 3 * n) {
        config_fail(where, "gain must have length 3n = " + std::to_string(3 * n));
      }
    }
    if (o.contains("xhat0")) {
      s.observer.xhat0 = to_vector(detail::number_array(o["xhat0"], where + ".xhat0"));
      if (s.observer.xhat0->size() != 2 * n) config_fail(where, "xhat0 must have length 2n");
    }
    if (o.contains("soc_offsets")) {
      s.observer.soc_offsets = detail::number_array(o["soc_offsets"], where + ".soc_offsets");
      if (static_cast<int>(s.observer.soc_offsets.size()) != n) {
        config_fail(where, "soc_offsets must have length n");
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path(), path.string());
}

VectorXd initial_state(const Scenario& s) { return s.x0.value_or(rest_state(s.pack.z0)); }

VectorXd initial_estimate(const Scenario& s) {
  if (s.observer.xhat0) return *s.observer.xhat0;
  VectorXd x = initial_state(s);
  for (std::size_t k = 0; k < s.observer.soc_offsets.size(); ++k) {
    x(static_cast<Eigen::Index>(2 * k)) += s.observer.soc_offsets[k];
  }
  return x;
}

std::optional<double> convergence_time(const Trajectory& traj, const EstimateTrajectory& est,
                                       double threshold) {
  const std::size_t m = std::min(traj.size(), est.size());
  if (m == 0) return std::nullopt;
  const int n = traj.n();
  std::optional<double> t_conv;
  for (std::size_t k = 0; k < m; ++k) {
    double err = 0.0;
    for (int c = 0; c < n; ++c) err = std::max(err, std::abs(est.xhat[k](2 * c) - traj.states[k].x(2 * c)));
    if (err < threshold) {
      if (!t_conv) t_conv = traj.times[k];
    } else {
      t_conv.reset();
    }
  }
  return t_conv;
}

ScenarioSummary summarize(const PackModel& model, const Trajectory& traj,
                          const EstimateTrajectory* est) {
  ScenarioSummary s;
  const int n = model.n();
  s.n = n;
  s.samples = traj.size();
  s.t_final = traj.times.empty() ? 0.0 : traj.times.back();
  s.mean_abs_current.assign(static_cast<std::size_t>(n), 0.0);

  double peak = 0.0;
  for (double i : traj.total_current) peak = std::max(peak, std::abs(i));
  std::size_t considered = 0, agreeing = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PackState& st = traj.states[k];
    const auto r = consistency_residuals(model, st.x, st.u, traj.total_current[k]);
    s.max_kcl = std::max(s.max_kcl, r.kcl);
    s.max_kvl = std::max(s.max_kvl, r.kvl);
    for (int c = 0; c < n; ++c) s.mean_abs_current[static_cast<std::size_t>(c)] += std::abs(st.u(c));
    const double i = traj.total_current[k];
    if (peak > 0.0 && std::abs(i) > 0.05 * peak) {
      ++considered;
      bool all = true;
      for (int c = 0; c < n; ++c) all = all && (st.u(c) * i > 0.0);
      if (all) ++agreeing;
    }
  }
  if (considered > 0) s.sign_agreement = static_cast<double>(agreeing) / static_cast<double>(considered);
  double total = 0.0;
  for (double& m : s.mean_abs_current) {
    if (!traj.times.empty()) m /= static_cast<double>(traj.size());
    total += m;
  }
  for (int c = 1; c < n; ++c) {
    if (model.cell(c).r1 > model.cell(s.highest_r1_cell).r1) s.highest_r1_cell = c;
  }
  if (total > 0.0) s.highest_r1_share = s.mean_abs_current[static_cast<std::size_t>(s.highest_r1_cell)] / total;

  if (est != nullptr && est->size() > 0 && traj.size() > 0) {
    s.observer_ran = true;
    s.convergence_time = convergence_time(traj, *est);
    const std::size_t last = std::min(traj.size(), est->size()) - 1;
    for (int c = 0; c < n; ++c) {
      s.final_soc_error.push_back(est->xhat[last](2 * c) - traj.states[last].x(2 * c));
      s.final_vc_error.push_back(est->xhat[last](2 * c + 1) - traj.states[last].x(2 * c + 1));
      s.final_current_error.push_back(est->uhat[last](c) - traj.states[last].u(c));
    }
  }
  return s;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

ScenarioSummary run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
                             const std::function<void(const std::string&)>& on_warning) {
  std::filesystem::create_directories(out_dir);
  const PackModel model = assemble(sc.pack);
  const VectorXd x0 = initial_state(sc);
  if (x0.size() != model.nx()) throw Error(ErrorCode::ConfigError, "x0 must have length 2n");

  std::vector<std::string> warnings;
  auto warn = [&](std::string msg) {
    if (on_warning) on_warning(msg);
    warnings.push_back(std::move(msg));
  };
  std::optional<Verdict> verdict;
  if (sc.analyze) {
    const ObservabilityReport rep = analyze_observability(model, x0);
    verdict = rep.verdict;
    write_text(out_dir / "observability.json", to_json(rep));
    if (rep.verdict == Verdict::Unobservable) {
      warn("pack is Unobservable at x0; SOC estimates of individual cells are not reliable");
    } else if (rep.verdict == Verdict::Indeterminate) {
      warn("observability at x0 could not be certified");
    }
  }

  const DriveCycle cycle = make_cycle(sc.cycle);
  const double t_end = sc.t_end_s > 0.0 ? sc.t_end_s : cycle.t_end();
  const Trajectory traj = simulate(model, x0, cycle, sc.dt_s, t_end);
  write_trajectory(traj, out_dir / "trajectory.csv");
  for (const SocEvent& e : traj.soc_events) {
    if (e.exited) {
      warn("cell " + std::to_string(e.cell + 1) + " left the SOC range [0, 1] at t = " +
                         format_double(e.t) + " s");
    }
  }

  std::optional<EstimateTrajectory> est;
  std::optional<bool> valid;
  if (sc.observer.enabled) {
    const ObserverGain gain(sc.observer.gain);
    const GainValidityReport vr = validate_gain(model, gain);
    valid = vr.verdict;
    write_text(out_dir / "validity.json", to_json(vr));
    if (!vr.verdict) warn("gain does not pass the sufficient convergence conditions");
    const Observer obs(model, gain);
    const auto meas = measurements_from(traj);
    try {
      est = obs.run(initial_estimate(sc), meas);
      write_estimates(*est, out_dir / "estimates.csv");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      warn(e.what());
    }
  }

  ScenarioSummary s = summarize(model, traj, est ? &*est : nullptr);
  s.name = sc.name;
  s.observability = verdict;
  s.gain_valid = valid;
  s.warnings = std::move(warnings);
  write_text(out_dir / "summary.json", to_json(s));
  return s;
}

std::string to_json(const ScenarioSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["n"] = s.n;
  j["samples"] = s.samples;
  j["t_final_s"] = s.t_final;
  j["warnings"] = s.warnings;
  j["observability"] = s.observability ? nlohmann::ordered_json(std::string(to_string(*s.observability)))
                                       : nlohmann::ordered_json(nullptr);
  j["max_kcl_residual_a"] = s.max_kcl;
  j["max_kvl_residual_v"] = s.max_kvl;
  j["sign_agreement"] = s.sign_agreement;
  j["mean_abs_current_a"] = s.mean_abs_current;
  j["highest_r1_cell"] = s.highest_r1_cell + 1;
  j["highest_r1_current_share"] = s.highest_r1_share;
  j["observer_ran"] = s.observer_ran;
  if (s.observer_ran) {
    j["convergence_time_s"] =
        s.convergence_time ? nlohmann::ordered_json(*s.convergence_time) : nlohmann::ordered_json(nullptr);
    j["final_soc_error"] = s.final_soc_error;
    j["final_vc_error_v"] = s.final_vc_error;
    j["final_current_error_a"] = s.final_current_error;
  }
  if (s.gain_valid) j["gain_valid"] = *s.gain_valid;
  return j.dump(2) + "\n";
}

}  // namespace parcell
