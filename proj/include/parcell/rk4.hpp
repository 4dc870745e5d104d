#pragma once

#include <Eigen/Dense>

namespace parcell {

/// One classical fourth-order Runge-Kutta step of x' = rhs(x).
template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& rhs, const Eigen::VectorXd& x, double dt) {
  const Eigen::VectorXd k1 = rhs(x);
  const Eigen::VectorXd k2 = rhs(Eigen::VectorXd(x + 0.5 * dt * k1));
  const Eigen::VectorXd k3 = rhs(Eigen::VectorXd(x + 0.5 * dt * k2));
  const Eigen::VectorXd k4 = rhs(Eigen::VectorXd(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace parcell
