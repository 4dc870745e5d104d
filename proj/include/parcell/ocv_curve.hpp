#pragma once

#include <memory>
#include <variant>
#include <vector>

namespace parcell {

enum class TableInterp { Linear, Pchip };

/// Open-circuit voltage as a function of state of charge.
///
/// Two representations are supported: a polynomial in z (ascending
/// coefficients) and a lookup table. Tables interpolate either linearly or
/// with a monotone piecewise-cubic Hermite (PCHIP) scheme. Derivatives are
/// exact for the representation; a table only provides derivatives up to the
/// order its pieces support (linear: 0, pchip: 3), and asking for more throws
/// ErrorCode::DerivativeUnavailable.
class OcvCurve {
 public:
  static OcvCurve polynomial(std::vector<double> coeffs);
  static OcvCurve table(std::vector<double> z, std::vector<double> v,
                        TableInterp interp = TableInterp::Pchip);

  /// NMC-like 7th-order polynomial spanning roughly 3.0 V to 4.2 V on [0, 1],
  /// strictly increasing.
  static const OcvCurve& default_nmc();

  double value(double z) const { return derivative(z, 0); }
  double derivative(double z, int order) const;

  /// Highest derivative order this curve can supply. Polynomials report a
  /// large number (all higher derivatives are exactly zero).
  int max_derivative_order() const;

  bool is_polynomial() const { return std::holds_alternative<Poly>(rep_); }
  const std::vector<double>& coefficients() const;

  /// True if value() is strictly increasing on [0, 1] and the derivative is
  /// positive at every one of `samples` evenly spaced points.
  bool is_strictly_increasing(int samples = 1000) const;

 private:
  struct Poly {
    std::vector<double> c;
  };
  struct Table {
    std::vector<double> z, v;
    // Hermite slopes at the knots (pchip) or segment slopes (linear).
    std::vector<double> m;
    TableInterp interp;
  };

  explicit OcvCurve(Poly p) : rep_(std::move(p)) {}
  explicit OcvCurve(Table t) : rep_(std::move(t)) {}

  std::variant<Poly, Table> rep_;
};

using OcvCurvePtr = std::shared_ptr<const OcvCurve>;

OcvCurvePtr default_ocv_ptr();

}  // namespace parcell
