#pragma once

#include <random>
#include <vector>

#include "parcell/cell_model.hpp"
#include "parcell/pack_model.hpp"

namespace parcell::testing {

inline std::vector<CellParams> reference_cells() {
  return {CellParams::from_amp_hours(0.0025, 0.004, 1500.0, 2.3),
          CellParams::from_amp_hours(0.0015, 0.0035, 2000.0, 2.0)};
}

inline PackModel reference_model() { return PackModel::assemble(reference_cells()); }

inline PackModel identical_model() {
  const CellParams c = CellParams::from_amp_hours(0.0025, 0.004, 1500.0, 2.3);
  return PackModel::assemble({c, c});
}

/// Different parameters that nevertheless share tau, r1*q and r1*c.
inline PackModel condition1_model() {
  return PackModel::assemble({CellParams{0.002, 0.003, 2000.0, 8000.0},
                              CellParams{0.004, 0.006, 1000.0, 4000.0}});
}

inline PackModel flat_ocv_model() {
  auto flat = std::make_shared<const OcvCurve>(OcvCurve::polynomial({3.7}));
  auto cells = reference_cells();
  for (auto& c : cells) c.ocv = flat;
  return PackModel::assemble(cells);
}

inline Eigen::VectorXd gain_l() {
  Eigen::VectorXd k(6);
  k << -30, -30, -20, 2, 4, -20;
  return k;
}

inline Eigen::VectorXd state2(double z1, double vc1, double z2, double vc2) {
  Eigen::VectorXd x(4);
  x << z1, vc1, z2, vc2;
  return x;
}

/// Interior points with both cells in the same state.
inline std::vector<Eigen::VectorXd> equal_state_points(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z(0.1, 0.9), vc(-0.05, 0.05);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i) {
    const double zz = z(rng), vv = vc(rng);
    pts.push_back(state2(zz, vv, zz, vv));
  }
  return pts;
}

inline std::vector<Eigen::VectorXd> random_points(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z(0.1, 0.9), vc(-0.05, 0.05);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(2 * n);
    for (int k = 0; k < n; ++k) {
      x(2 * k) = z(rng);
      x(2 * k + 1) = vc(rng);
    }
    pts.push_back(x);
  }
  return pts;
}

}  // namespace parcell::testing
