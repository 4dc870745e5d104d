#include "parcell/reports.hpp"

#include "json.hpp"

namespace parcell {

namespace {

using Json = nlohmann::ordered_json;

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json cplx(std::complex<double> c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Json cvec(const Eigen::VectorXcd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cplx(v(i)));
  return a;
}

}  // namespace

std::string to_json(const ObservabilityReport& r) {
  Json j;
  j["n"] = r.n;
  j["x0"] = vec(r.x0);
  j["verdict"] = std::string(to_string(r.verdict));
  j["linearized"] = {{"verdict", std::string(to_string(r.linear_verdict))},
                     {"c1", r.c1},
                     {"c1_rank", r.c1_rank},
                     {"c2", r.c2}};
  Json evs = Json::array();
  for (const auto& p : r.c2_results) {
    evs.push_back({{"s", cplx(p.s)}, {"rank", p.rank}, {"sigma_min", p.sigma_min}});
  }
  j["linearized"]["c2_eigenvalues"] = evs;
  j["lie"] = {{"verdict", std::string(to_string(r.lie_verdict))},
              {"rank", r.lie_rank},
              {"singular_values", vec(r.lie_singular_values)},
              {"rows", r.lie_labels}};
  j["triggered_conditions"] = r.triggered_conditions;
  j["pathology_derivative_order_checked"] = r.pathology_order_checked;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string to_json(const GainValidityReport& r) {
  Json j;
  j["verdict"] = r.verdict;
  j["impulse_observable"] = r.impulse_obs;
  j["operating_point"] = vec(r.operating_point);
  j["g_tilde_eigenvalues"] = cvec(r.g_tilde_eigs);
  j["g_tilde_stable"] = r.g_tilde_stable;
  j["g_tilde_worst_abscissa"] = r.g_tilde_worst_abscissa;
  j["g22_condition"] = r.g22_condition;
  j["gamma_hat"] = r.gamma_hat;
  j["spectral"] = {{"min_sigma", r.min_sigma},
                   {"omega_at_min", r.omega_at_min},
                   {"margin", r.spectral_margin},
                   {"eigenvalue_margin", r.eig_margin}};
  return j.dump(2) + "\n";
}

}  // namespace parcell
