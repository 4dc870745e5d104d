#include "parcell/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "parcell/errors.hpp"
#include "parcell/number_format.hpp"

namespace parcell {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(line) + ": " + msg);
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

/// Reads the header and returns, for each expected column, its position.
std::vector<std::size_t> match_header(const std::vector<std::string>& header,
                                      const std::vector<std::string>& expected,
                                      const std::string& source) {
  std::vector<std::size_t> pos;
  for (const auto& name : expected) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) found = i;
    }
    if (found == header.size()) fail(source, 1, "missing header column '" + name + "'");
    pos.push_back(found);
  }
  return pos;
}

double field(const std::vector<std::string>& row, std::size_t idx, const std::string& column,
             const std::string& source, std::size_t line) {
  if (idx >= row.size()) fail(source, line, "missing value for column '" + column + "'");
  const auto v = parse_double(row[idx]);
  if (!v) fail(source, line, "cannot parse '" + row[idx] + "' in column '" + column + "'");
  return *v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::vector<std::string> trajectory_columns(int n) {
  std::vector<std::string> cols{"t_s"};
  for (const char* p : {"z_", "vc_", "i_"}) {
    for (int k = 1; k <= n; ++k) cols.push_back(p + std::to_string(k));
  }
  cols.emplace_back("v_terminal");
  return cols;
}

void write_row(std::ostream& out, const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out << ',';
    out << format_double(vals[i]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace

DriveCycle parse_drive_cycle(std::istream& in, const std::string& source, CycleInterp interp) {
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "empty file, expected header 't_s,i_a'");
  const auto pos = match_header(split_row(line), {"t_s", "i_a"}, source);
  std::vector<CycleSample> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto row = split_row(line);
    CycleSample s{field(row, pos[0], "t_s", source, lineno), field(row, pos[1], "i_a", source, lineno)};
    if (!samples.empty() && !(s.t > samples.back().t)) {
      fail(source, lineno, "timestamps must be strictly increasing");
    }
    samples.push_back(s);
  }
  if (samples.empty()) fail(source, lineno, "no samples");
  return DriveCycle(std::move(samples), interp);
}

DriveCycle load_drive_cycle(const std::filesystem::path& path, CycleInterp interp) {
  auto in = open_in(path);
  return parse_drive_cycle(in, path.string(), interp);
}

void write_drive_cycle(const DriveCycle& cycle, std::ostream& out) {
  out << "t_s,i_a\n";
  for (const auto& s : cycle.samples()) write_row(out, {s.t, s.i});
}

void write_drive_cycle(const DriveCycle& cycle, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_drive_cycle(cycle, out);
}

void write_trajectory(const Trajectory& traj, std::ostream& out) {
  const int n = traj.n();
  write_header(out, trajectory_columns(n));
  std::vector<double> row(static_cast<std::size_t>(3 * n + 2));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PackState& s = traj.states[k];
    row[0] = traj.times[k];
    for (int c = 0; c < n; ++c) {
      row[static_cast<std::size_t>(1 + c)] = s.x(2 * c);
      row[static_cast<std::size_t>(1 + n + c)] = s.x(2 * c + 1);
      row[static_cast<std::size_t>(1 + 2 * n + c)] = s.u(c);
    }
    row.back() = traj.terminal_voltage[k];
    write_row(out, row);
  }
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trajectory(traj, out);
}

Trajectory parse_trajectory(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "empty file");
  const auto header = split_row(line);
  int n = 0;
  while (std::find(header.begin(), header.end(), "z_" + std::to_string(n + 1)) != header.end()) ++n;
  if (n < 1) fail(source, 1, "missing header column 'z_1'");
  const auto cols = trajectory_columns(n);
  const auto pos = match_header(header, cols, source);

  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto row = split_row(line);
    std::vector<double> v(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) v[i] = field(row, pos[i], cols[i], source, lineno);
    if (!traj.times.empty() && !(v[0] > traj.times.back())) {
      fail(source, lineno, "timestamps must be strictly increasing");
    }
    PackState s{VectorXd(2 * n), VectorXd(n), v[0]};
    for (int c = 0; c < n; ++c) {
      s.x(2 * c) = v[static_cast<std::size_t>(1 + c)];
      s.x(2 * c + 1) = v[static_cast<std::size_t>(1 + n + c)];
      s.u(c) = v[static_cast<std::size_t>(1 + 2 * n + c)];
    }
    traj.times.push_back(v[0]);
    traj.total_current.push_back(s.u.sum());
    traj.states.push_back(std::move(s));
    traj.terminal_voltage.push_back(v.back());
  }
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_trajectory(in, path.string());
}

void write_estimates(const EstimateTrajectory& est, std::ostream& out) {
  const int n = est.uhat.empty() ? 0 : static_cast<int>(est.uhat.front().size());
  std::vector<std::string> cols{"t_s"};
  for (const char* p : {"z_hat_", "vc_hat_", "i_hat_"}) {
    for (int k = 1; k <= n; ++k) cols.push_back(p + std::to_string(k));
  }
  cols.emplace_back("y_hat");
  cols.emplace_back("innovation");
  write_header(out, cols);
  std::vector<double> row(cols.size());
  for (std::size_t k = 0; k < est.size(); ++k) {
    row[0] = est.times[k];
    for (int c = 0; c < n; ++c) {
      row[static_cast<std::size_t>(1 + c)] = est.xhat[k](2 * c);
      row[static_cast<std::size_t>(1 + n + c)] = est.xhat[k](2 * c + 1);
      row[static_cast<std::size_t>(1 + 2 * n + c)] = est.uhat[k](c);
    }
    row[row.size() - 2] = est.yhat[k];
    row.back() = est.innovation[k];
    write_row(out, row);
  }
}

void write_estimates(const EstimateTrajectory& est, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_estimates(est, out);
}

EstimateTrajectory parse_estimates(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "empty file");
  const auto header = split_row(line);
  int n = 0;
  while (std::find(header.begin(), header.end(), "z_hat_" + std::to_string(n + 1)) != header.end()) ++n;
  if (n < 1) fail(source, 1, "missing header column 'z_hat_1'");
  std::vector<std::string> cols{"t_s"};
  for (const char* p : {"z_hat_", "vc_hat_", "i_hat_"}) {
    for (int k = 1; k <= n; ++k) cols.push_back(p + std::to_string(k));
  }
  cols.emplace_back("y_hat");
  cols.emplace_back("innovation");
  const auto pos = match_header(header, cols, source);

  EstimateTrajectory est;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto row = split_row(line);
    std::vector<double> v(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) v[i] = field(row, pos[i], cols[i], source, lineno);
    if (!est.times.empty() && !(v[0] > est.times.back())) {
      fail(source, lineno, "timestamps must be strictly increasing");
    }
    VectorXd x(2 * n), u(n);
    for (int c = 0; c < n; ++c) {
      x(2 * c) = v[static_cast<std::size_t>(1 + c)];
      x(2 * c + 1) = v[static_cast<std::size_t>(1 + n + c)];
      u(c) = v[static_cast<std::size_t>(1 + 2 * n + c)];
    }
    est.times.push_back(v[0]);
    est.xhat.push_back(std::move(x));
    est.uhat.push_back(std::move(u));
    est.yhat.push_back(v[v.size() - 2]);
    est.innovation.push_back(v.back());
    est.bridged.push_back(false);
  }
  return est;
}

EstimateTrajectory load_estimates(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_estimates(in, path.string());
}

}  // namespace parcell
