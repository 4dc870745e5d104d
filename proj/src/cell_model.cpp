#include "parcell/cell_model.hpp"

#include <cmath>
#include <string>

#include "parcell/errors.hpp"

namespace parcell {

CellParams CellParams::from_amp_hours(double r1_ohm, double r2_ohm, double c_farad, double q_ah,
                                      OcvCurvePtr ocv) {
  CellParams p{r1_ohm, r2_ohm, c_farad, q_ah * 3600.0, std::move(ocv)};
  p.validate();
  return p;
}

void CellParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(name) + " must be finite and positive, got " + std::to_string(v));
    }
  };
  check(r1, "r1");
  check(r2, "r2");
  check(c, "c");
  check(q, "q");
  if (!ocv) throw Error(ErrorCode::InvalidArgument, "cell has no OCV curve");
}

CellMatrices cell_matrices(const CellParams& p) {
  CellMatrices m;
  m.a_bar << 0.0, 0.0, 0.0, -1.0 / (p.r2 * p.c);
  m.b_bar << 1.0 / p.q, 1.0 / p.c;
  m.d_bar = p.r1;
  return m;
}

double cell_output(const CellState& s, double i_k, const CellParams& p) {
  return p.curve().value(s.z) + s.v_c + p.r1 * i_k;
}

}  // namespace parcell
