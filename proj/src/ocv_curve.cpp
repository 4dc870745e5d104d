#include "parcell/ocv_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parcell/errors.hpp"

namespace parcell {

namespace {

constexpr int kPolyMaxOrder = std::numeric_limits<int>::max();

double falling_factorial(int i, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= static_cast<double>(i - j);
  return r;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

std::vector<double> pchip_slopes(const std::vector<double>& z, const std::vector<double>& v) {
  const std::size_t n = z.size();
  std::vector<double> h(n - 1), d(n - 1), m(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = z[k + 1] - z[k];
    d[k] = (v[k + 1] - v[k]) / h[k];
  }
  if (n == 2) {
    m[0] = m[1] = d[0];
    return m;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  // One-sided three-point end slopes, limited to preserve shape.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(s) != sign(d0)) {
      s = 0.0;
    } else if (sign(d0) != sign(d1) && std::abs(s) > 3.0 * std::abs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  m[0] = end_slope(h[0], h[1], d[0], d[1]);
  m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return m;
}

}  // namespace

OcvCurve OcvCurve::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "polynomial OCV curve needs at least one coefficient");
  }
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite OCV coefficient");
  }
  return OcvCurve(Poly{std::move(coeffs)});
}

OcvCurve OcvCurve::table(std::vector<double> z, std::vector<double> v, TableInterp interp) {
  if (z.size() != v.size() || z.size() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "OCV table needs matching z/v arrays with at least two points");
  }
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (!std::isfinite(z[k]) || !std::isfinite(v[k])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite OCV table entry");
    }
    if (k > 0 && !(z[k] > z[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "OCV table z values must be strictly increasing");
    }
  }
  Table t{std::move(z), std::move(v), {}, interp};
  if (interp == TableInterp::Pchip) {
    t.m = pchip_slopes(t.z, t.v);
  } else {
    t.m.resize(t.z.size() - 1);
    for (std::size_t k = 0; k + 1 < t.z.size(); ++k) {
      t.m[k] = (t.v[k + 1] - t.v[k]) / (t.z[k + 1] - t.z[k]);
    }
  }
  return OcvCurve(std::move(t));
}

const OcvCurve& OcvCurve::default_nmc() {
  // Least-squares degree-7 fit to a generic NMC/graphite OCV profile.
  // Minimum slope on [0, 1] is about 0.10 V per unit SOC.
  static const OcvCurve curve = polynomial({3.007373, 12.518951, -102.846311, 429.540563,
                                            -972.874870, 1220.347003, -795.391678, 209.899983});
  return curve;
}

OcvCurvePtr default_ocv_ptr() {
  static const OcvCurvePtr ptr = std::make_shared<OcvCurve>(OcvCurve::default_nmc());
  return ptr;
}

int OcvCurve::max_derivative_order() const {
  if (const auto* t = std::get_if<Table>(&rep_)) {
    return t->interp == TableInterp::Pchip ? 3 : 0;
  }
  return kPolyMaxOrder;
}

const std::vector<double>& OcvCurve::coefficients() const {
  if (const auto* p = std::get_if<Poly>(&rep_)) return p->c;
  throw Error(ErrorCode::InvalidArgument, "OCV curve is a table, not a polynomial");
}

double OcvCurve::derivative(double z, int order) const {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "negative derivative order");
  if (order > max_derivative_order()) {
    throw Error(ErrorCode::DerivativeUnavailable,
                "OCV table supports derivatives up to order " +
                    std::to_string(max_derivative_order()) + ", requested " +
                    std::to_string(order));
  }

  if (const auto* p = std::get_if<Poly>(&rep_)) {
    const auto& c = p->c;
    const int deg = static_cast<int>(c.size()) - 1;
    if (order > deg) return 0.0;
    double acc = 0.0;
    for (int i = deg; i >= order; --i) {
      acc = acc * z + c[static_cast<std::size_t>(i)] * falling_factorial(i, order);
    }
    return acc;
  }

  const auto& t = std::get<Table>(rep_);
  const std::size_t n = t.z.size();
  // Segment index; points outside the table extrapolate with the end piece.
  std::size_t k = 0;
  if (z >= t.z[n - 1]) {
    k = n - 2;
  } else if (z > t.z[0]) {
    k = static_cast<std::size_t>(std::upper_bound(t.z.begin(), t.z.end(), z) - t.z.begin()) - 1;
  }
  const double s = z - t.z[k];

  if (t.interp == TableInterp::Linear) {
    return t.v[k] + t.m[k] * s;
  }

  const double h = t.z[k + 1] - t.z[k];
  const double delta = (t.v[k + 1] - t.v[k]) / h;
  const double c1 = t.m[k];
  const double c2 = (3.0 * delta - 2.0 * t.m[k] - t.m[k + 1]) / h;
  const double c3 = (t.m[k] + t.m[k + 1] - 2.0 * delta) / (h * h);
  switch (order) {
    case 0:
      return t.v[k] + s * (c1 + s * (c2 + s * c3));
    case 1:
      return c1 + s * (2.0 * c2 + 3.0 * c3 * s);
    case 2:
      return 2.0 * c2 + 6.0 * c3 * s;
    default:
      return 6.0 * c3;
  }
}

bool OcvCurve::is_strictly_increasing(int samples) const {
  if (samples < 2) samples = 2;
  double prev = value(0.0);
  for (int i = 0; i < samples; ++i) {
    const double z = static_cast<double>(i) / (samples - 1);
    const double v = value(z);
    if (i > 0 && !(v > prev)) return false;
    if (max_derivative_order() >= 1 && !(derivative(z, 1) > 0.0)) return false;
    prev = v;
  }
  return true;
}

}  // namespace parcell
