#include "parcell/config.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "config_json.hpp"
#include "parcell/number_format.hpp"

namespace parcell {

namespace detail {

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    config_fail(source, std::string("invalid JSON: ") + e.what());
  }
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) config_fail(where, std::string("missing key '") + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_number()) config_fail(where, std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return require_number(obj, key, where);
}

std::vector<double> number_array(const Json& v, const std::string& where) {
  if (!v.is_array()) config_fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) config_fail(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

namespace {

OcvCurvePtr ocv_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    config_fail(where, "ocv block needs a string 'kind' (\"poly\" or \"table\")");
  }
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "poly") {
      if (!j.contains("coeffs")) config_fail(where, "missing key 'coeffs'");
      return std::make_shared<const OcvCurve>(
          OcvCurve::polynomial(number_array(j["coeffs"], where + ".coeffs")));
    }
    if (kind == "table") {
      if (!j.contains("z") || !j.contains("v")) config_fail(where, "table ocv needs 'z' and 'v'");
      TableInterp interp = TableInterp::Pchip;
      if (j.contains("interp")) {
        const std::string s = j["interp"].is_string() ? j["interp"].get<std::string>() : "";
        if (s == "linear") {
          interp = TableInterp::Linear;
        } else if (s != "pchip") {
          config_fail(where, "interp must be \"pchip\" or \"linear\"");
        }
      }
      return std::make_shared<const OcvCurve>(OcvCurve::table(
          number_array(j["z"], where + ".z"), number_array(j["v"], where + ".v"), interp));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail(where, e.what());
  }
  config_fail(where, "unknown ocv kind '" + kind + "'");
}

}  // namespace

PackConfig pack_from_json(const Json& j, const std::string& source) {
  if (!j.is_object()) config_fail(source, "pack config must be a JSON object");
  OcvCurvePtr shared = default_ocv_ptr();
  if (j.contains("ocv")) shared = ocv_from_json(j["ocv"], source + ": ocv");
  if (!j.contains("cells") || !j["cells"].is_array()) config_fail(source, "missing array 'cells'");

  PackConfig cfg;
  std::size_t idx = 0;
  for (const Json& c : j["cells"]) {
    const std::string where = source + ": cells[" + std::to_string(idx++) + "]";
    if (!c.is_object()) config_fail(where, "cell block must be an object");
    OcvCurvePtr ocv = c.contains("ocv") ? ocv_from_json(c["ocv"], where + ".ocv") : shared;
    const double r1 = require_number(c, "r1_ohm", where);
    const double r2 = require_number(c, "r2_ohm", where);
    const double cap = require_number(c, "c_farad", where);
    const double q = require_number(c, "q_ah", where);
    std::optional<CellParams> p;
    try {
      p.emplace(CellParams::from_amp_hours(r1, r2, cap, q, std::move(ocv)));
      p->validate();
    } catch (const Error& e) {
      config_fail(where, e.what());
    }
    cfg.cells.push_back(std::move(*p));
    cfg.z0.push_back(number_or(c, "z0", 0.5, where));
  }
  if (cfg.cells.size() < 2) config_fail(source, "a pack needs at least two cells");
  return cfg;
}

}  // namespace detail

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PackConfig parse_pack_config(std::string_view json_text, const std::string& source) {
  return detail::pack_from_json(detail::parse_json(json_text, source), source);
}

PackConfig load_pack_config(const std::filesystem::path& path) {
  return parse_pack_config(read_text_file(path), path.string());
}

PackModel assemble(const PackConfig& cfg, PackTolerances tol) {
  return PackModel::assemble(cfg.cells, tol);
}

VectorXd parse_csv_vector(std::string_view text) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto v = parse_double(item);
    if (!v) {
      throw Error(ErrorCode::ConfigError, "cannot parse '" + std::string(item) + "' in vector '" +
                                              std::string(text) + "'");
    }
    vals.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Eigen::Map<const VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace parcell
