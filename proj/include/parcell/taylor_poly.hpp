#pragma once

#include <memory>
#include <vector>

namespace parcell {

/// Monomial layout shared by every TaylorPoly of the same (vars, degree):
/// graded enumeration of exponents with precomputed product and derivative
/// index tables.
class MonomialBasis {
 public:
  MonomialBasis(int vars, int degree);

  int vars() const { return vars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const std::vector<int>& exponents(int idx) const { return exps_[static_cast<std::size_t>(idx)]; }
  int total_degree(int idx) const { return deg_[static_cast<std::size_t>(idx)]; }
  /// Index of the product monomial, or -1 if it exceeds the truncation degree.
  int product(int a, int b) const { return mul_[static_cast<std::size_t>(a * size() + b)]; }
  /// Index of the monomial obtained by lowering exponent `var` by one, or -1.
  int lowered(int idx, int var) const {
    return low_[static_cast<std::size_t>(idx * vars_ + var)];
  }
  /// Index of the degree-1 monomial in variable `var`.
  int linear(int var) const { return 1 + var; }

 private:
  int find(const std::vector<int>& e) const;

  int vars_, degree_;
  std::vector<std::vector<int>> exps_;
  std::vector<int> deg_;
  std::vector<int> mul_;
  std::vector<int> low_;
};

/// Multivariate polynomial in deviations from an expansion point, truncated
/// at the basis degree. Used as forward-mode Taylor arithmetic: products drop
/// terms past the truncation degree, and partial derivatives are exact.
class TaylorPoly {
 public:
  explicit TaylorPoly(std::shared_ptr<const MonomialBasis> basis);

  static TaylorPoly constant(std::shared_ptr<const MonomialBasis> basis, double c);
  /// The deviation variable delta_var (coefficient 1 on its linear monomial).
  static TaylorPoly variable(std::shared_ptr<const MonomialBasis> basis, int var);

  const MonomialBasis& basis() const { return *basis_; }
  double coeff(int idx) const { return c_[static_cast<std::size_t>(idx)]; }
  double& coeff(int idx) { return c_[static_cast<std::size_t>(idx)]; }
  double value() const { return c_[0]; }

  TaylorPoly& operator+=(const TaylorPoly& o);
  TaylorPoly& operator-=(const TaylorPoly& o);
  TaylorPoly& operator*=(double s);
  friend TaylorPoly operator+(TaylorPoly a, const TaylorPoly& b) { return a += b; }
  friend TaylorPoly operator-(TaylorPoly a, const TaylorPoly& b) { return a -= b; }
  friend TaylorPoly operator*(TaylorPoly a, double s) { return a *= s; }
  friend TaylorPoly operator*(double s, TaylorPoly a) { return a *= s; }
  friend TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b);

  TaylorPoly partial(int var) const;
  /// Gradient at the expansion point (coefficients of the linear monomials).
  std::vector<double> gradient() const;

  /// sum_k d[k] / k! * p^k for a univariate function with derivatives d at
  /// the point where p's deviation vanishes (p.value() is ignored).
  static TaylorPoly compose(const std::vector<double>& derivs, const TaylorPoly& p);

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  std::vector<double> c_;
};

}  // namespace parcell
