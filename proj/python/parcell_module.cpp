#include <optional>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "parcell/config.hpp"
#include "parcell/errors.hpp"
#include "parcell/observability.hpp"
#include "parcell/observer.hpp"
#include "parcell/plant_sim.hpp"
#include "parcell/reports.hpp"
#include "parcell/scenario.hpp"

namespace py = pybind11;
using namespace parcell;

namespace {

/// Trajectory as a dict of numpy-friendly arrays.
py::dict trajectory_dict(const Trajectory& t) {
  const auto rows = static_cast<Eigen::Index>(t.size());
  const int n = t.n();
  Eigen::MatrixXd x(rows, 2 * n), u(rows, n);
  for (Eigen::Index k = 0; k < rows; ++k) {
    x.row(k) = t.states[static_cast<std::size_t>(k)].x.transpose();
    u.row(k) = t.states[static_cast<std::size_t>(k)].u.transpose();
  }
  py::dict d;
  d["t"] = t.times;
  d["x"] = x;
  d["u"] = u;
  d["v_terminal"] = t.terminal_voltage;
  d["i_total"] = t.total_current;
  return d;
}

py::dict estimates_dict(const EstimateTrajectory& e) {
  const auto rows = static_cast<Eigen::Index>(e.size());
  const auto nx = rows ? e.xhat.front().size() : 0;
  const auto n = rows ? e.uhat.front().size() : 0;
  Eigen::MatrixXd x(rows, nx), u(rows, n);
  for (Eigen::Index k = 0; k < rows; ++k) {
    x.row(k) = e.xhat[static_cast<std::size_t>(k)].transpose();
    u.row(k) = e.uhat[static_cast<std::size_t>(k)].transpose();
  }
  py::dict d;
  d["t"] = e.times;
  d["xhat"] = x;
  d["uhat"] = u;
  d["yhat"] = e.yhat;
  d["innovation"] = e.innovation;
  d["bridged"] = e.bridged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_parcell, m) {
  m.doc() = "Parallel Li-ion cell pack model, observability analysis and state observer";

  static py::exception<Error> exc(m, "ParcellError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      exc(e.what());
    }
  });

  py::class_<OcvCurve, std::shared_ptr<OcvCurve>>(m, "OcvCurve")
      .def_static("polynomial", [](std::vector<double> c) {
        return std::make_shared<OcvCurve>(OcvCurve::polynomial(std::move(c)));
      })
      .def_static("table", [](std::vector<double> z, std::vector<double> v, const std::string& interp) {
        return std::make_shared<OcvCurve>(OcvCurve::table(
            std::move(z), std::move(v), interp == "linear" ? TableInterp::Linear : TableInterp::Pchip));
      }, py::arg("z"), py::arg("v"), py::arg("interp") = "pchip")
      .def_static("default", [] { return std::make_shared<OcvCurve>(OcvCurve::default_nmc()); })
      .def("value", &OcvCurve::value)
      .def("derivative", &OcvCurve::derivative, py::arg("z"), py::arg("order") = 1);

  py::class_<CellParams>(m, "CellParams")
      .def(py::init([](double r1, double r2, double c, double q_ah, std::shared_ptr<OcvCurve> ocv) {
             return CellParams::from_amp_hours(r1, r2, c, q_ah,
                                               ocv ? OcvCurvePtr(ocv) : default_ocv_ptr());
           }),
           py::arg("r1_ohm"), py::arg("r2_ohm"), py::arg("c_farad"), py::arg("q_ah"),
           py::arg("ocv") = nullptr)
      .def_readonly("r1", &CellParams::r1)
      .def_readonly("r2", &CellParams::r2)
      .def_readonly("c", &CellParams::c)
      .def_readonly("q", &CellParams::q);

  py::class_<PackModel>(m, "PackModel")
      .def(py::init([](std::vector<CellParams> cells) { return PackModel::assemble(std::move(cells)); }))
      .def_property_readonly("n", &PackModel::n)
      .def_property_readonly("E", &PackModel::e_mat)
      .def_property_readonly("A", &PackModel::a_mat)
      .def_property_readonly("H", &PackModel::h_mat)
      .def_property_readonly("a22_determinant", &PackModel::a22_determinant)
      .def("solve_algebraic", &PackModel::solve_algebraic, py::arg("x"), py::arg("i_total"))
      .def("reduced_rhs", &PackModel::reduced_rhs, py::arg("x"), py::arg("i_total"))
      .def("reduced_output", &PackModel::reduced_output, py::arg("x"), py::arg("i_total"));

  py::class_<DriveCycle>(m, "DriveCycle")
      .def(py::init([](std::vector<double> t, std::vector<double> i) {
        if (t.size() != i.size()) throw Error(ErrorCode::InvalidArgument, "t and i differ in length");
        std::vector<CycleSample> s;
        for (std::size_t k = 0; k < t.size(); ++k) s.push_back({t[k], i[k]});
        return DriveCycle(std::move(s));
      }))
      .def_property_readonly("t_end", &DriveCycle::t_end)
      .def("current_at", &DriveCycle::current_at);

  m.def("synth_udds_like", &synth_udds_like, py::arg("amplitude"), py::arg("duration"), py::arg("seed") = 1);
  m.def("rest_state", &rest_state, py::arg("z0"));
  m.def("load_pack_config", [](const std::string& path) {
    const PackConfig cfg = load_pack_config(path);
    return py::make_tuple(assemble(cfg), cfg.z0);
  }, "Returns (PackModel, z0).");

  m.def("simulate", [](const PackModel& model, const VectorXd& x0, const DriveCycle& cycle, double dt,
                       std::optional<double> t_end) {
    return trajectory_dict(simulate(model, x0, cycle, dt, t_end.value_or(cycle.t_end())));
  }, py::arg("model"), py::arg("x0"), py::arg("cycle"), py::arg("dt") = 0.1, py::arg("t_end") = py::none());

  py::class_<ObserverGain>(m, "ObserverGain")
      .def(py::init<VectorXd>())
      .def_property_readonly("k", &ObserverGain::k);

  m.def("run_observer", [](const PackModel& model, const ObserverGain& gain, const VectorXd& xhat0,
                           const std::vector<double>& t, const std::vector<double>& y,
                           const std::vector<double>& i_total) {
    if (t.size() != y.size() || t.size() != i_total.size()) {
      throw Error(ErrorCode::InvalidArgument, "t, y and i_total differ in length");
    }
    std::vector<Measurement> meas;
    for (std::size_t k = 0; k < t.size(); ++k) meas.push_back({t[k], y[k], i_total[k]});
    return estimates_dict(Observer(model, gain).run(xhat0, meas));
  }, py::arg("model"), py::arg("gain"), py::arg("xhat0"), py::arg("t"), py::arg("y"), py::arg("i_total"));

  py::class_<ObservabilityReport>(m, "ObservabilityReport")
      .def_property_readonly("verdict", [](const ObservabilityReport& r) { return std::string(to_string(r.verdict)); })
      .def_readonly("c1", &ObservabilityReport::c1)
      .def_readonly("c2", &ObservabilityReport::c2)
      .def_readonly("lie_rank", &ObservabilityReport::lie_rank)
      .def_readonly("lie_singular_values", &ObservabilityReport::lie_singular_values)
      .def_readonly("triggered_conditions", &ObservabilityReport::triggered_conditions)
      .def("to_json", [](const ObservabilityReport& r) { return to_json(r); });

  m.def("analyze_observability", [](const PackModel& model, const VectorXd& x0, int max_order) {
    ObservabilityOptions o;
    o.lie.max_order = max_order;
    return analyze_observability(model, x0, o);
  }, py::arg("model"), py::arg("x0"), py::arg("max_order") = 2);

  m.def("lie_observability_matrix", [](const PackModel& model, const VectorXd& x0, int max_order,
                                       const std::string& method) {
    LieOptions o;
    o.max_order = max_order;
    o.method = method == "fd" ? LieMethod::CentralDifference : LieMethod::Taylor;
    const LieMatrix lm = lie_observability_matrix(model, x0, o);
    return py::make_tuple(lm.rows, lm.labels);
  }, py::arg("model"), py::arg("x0"), py::arg("max_order") = 2, py::arg("method") = "taylor");

  py::class_<GainValidityReport>(m, "GainValidityReport")
      .def_readonly("verdict", &GainValidityReport::verdict)
      .def_readonly("impulse_obs", &GainValidityReport::impulse_obs)
      .def_readonly("g_tilde_stable", &GainValidityReport::g_tilde_stable)
      .def_readonly("g_tilde_eigs", &GainValidityReport::g_tilde_eigs)
      .def_readonly("gamma_hat", &GainValidityReport::gamma_hat)
      .def_readonly("min_sigma", &GainValidityReport::min_sigma)
      .def_readonly("spectral_margin", &GainValidityReport::spectral_margin)
      .def("to_json", [](const GainValidityReport& r) { return to_json(r); });

  m.def("validate_gain", [](const PackModel& model, const ObserverGain& gain, int samples) {
    GainValidityOptions o;
    o.lipschitz_samples = samples;
    return validate_gain(model, gain, o);
  }, py::arg("model"), py::arg("gain"), py::arg("lipschitz_samples") = 256);

  m.def("load_scenario_and_run", [](const std::string& path, const std::string& out_dir) {
    return to_json(run_scenario(load_scenario(path), out_dir));
  }, py::arg("path"), py::arg("out_dir"), "Runs a scenario file and returns the summary JSON text.");
}
