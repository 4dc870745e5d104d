#include <gtest/gtest.h>

#include <cmath>

#include "parcell/taylor_poly.hpp"

using namespace parcell;

TEST(TaylorPoly, BasisEnumeratesGradedMonomials) {
  const MonomialBasis b(2, 3);
  EXPECT_EQ(b.size(), 10);  // C(2 + 3, 3)
  EXPECT_EQ(b.total_degree(0), 0);
  EXPECT_EQ(b.exponents(b.linear(1)), (std::vector<int>{0, 1}));
  EXPECT_EQ(b.product(b.linear(0), b.linear(1)) >= 0, true);
}

TEST(TaylorPoly, ProductTruncatesAtDegree) {
  auto b = std::make_shared<const MonomialBasis>(1, 2);
  const TaylorPoly x = TaylorPoly::variable(b, 0);
  const TaylorPoly p = TaylorPoly::constant(b, 1.0) + x;  // 1 + x
  const TaylorPoly cube = p * p * p;                      // 1 + 3x + 3x^2 (x^3 dropped)
  EXPECT_DOUBLE_EQ(cube.coeff(0), 1.0);
  EXPECT_DOUBLE_EQ(cube.coeff(1), 3.0);
  EXPECT_DOUBLE_EQ(cube.coeff(2), 3.0);
}

TEST(TaylorPoly, PartialDerivativeOfMixedTerm) {
  auto b = std::make_shared<const MonomialBasis>(2, 3);
  const TaylorPoly x = TaylorPoly::variable(b, 0);
  const TaylorPoly y = TaylorPoly::variable(b, 1);
  const TaylorPoly p = x * x * y + 2.0 * y;  // d/dx = 2xy, d/dy = x^2 + 2
  const TaylorPoly px = p.partial(0);
  const TaylorPoly py = p.partial(1);
  EXPECT_DOUBLE_EQ(px.coeff(b->product(b->linear(0), b->linear(1))), 2.0);
  EXPECT_DOUBLE_EQ(py.value(), 2.0);
  EXPECT_DOUBLE_EQ(py.coeff(b->product(b->linear(0), b->linear(0))), 1.0);
  EXPECT_EQ(p.gradient(), (std::vector<double>{0.0, 2.0}));
}

TEST(TaylorPoly, ComposeReproducesExponentialSeries) {
  auto b = std::make_shared<const MonomialBasis>(2, 4);
  const TaylorPoly s = TaylorPoly::variable(b, 0) + TaylorPoly::variable(b, 1);
  const std::vector<double> d(5, std::exp(0.3));  // all derivatives of exp at 0.3
  const TaylorPoly e = TaylorPoly::compose(d, s);
  // exp(0.3 + a + c) = exp(0.3) * sum (a + c)^k / k!; check a few coefficients.
  const int aa = b->product(b->linear(0), b->linear(0));
  const int ac = b->product(b->linear(0), b->linear(1));
  EXPECT_NEAR(e.value(), std::exp(0.3), 1e-15);
  EXPECT_NEAR(e.coeff(aa), std::exp(0.3) / 2.0, 1e-15);
  EXPECT_NEAR(e.coeff(ac), std::exp(0.3), 1e-15);
  const int a4 = b->product(aa, aa);
  EXPECT_NEAR(e.coeff(a4), std::exp(0.3) / 24.0, 1e-15);
}
