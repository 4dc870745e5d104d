#include "parcell/taylor_poly.hpp"

#include <algorithm>
#include <functional>

namespace parcell {

MonomialBasis::MonomialBasis(int vars, int degree) : vars_(vars), degree_(degree) {
  // Graded enumeration: all exponents of total degree 0, then 1, ...
  std::vector<int> e(static_cast<std::size_t>(vars), 0);
  for (int d = 0; d <= degree; ++d) {
    std::function<void(int, int)> rec = [&](int var, int left) {
      if (var == vars - 1) {
        e[static_cast<std::size_t>(var)] = left;
        exps_.push_back(e);
        deg_.push_back(d);
        return;
      }
      for (int p = left; p >= 0; --p) {
        e[static_cast<std::size_t>(var)] = p;
        rec(var + 1, left - p);
      }
    };
    rec(0, d);
  }
  const int m = size();
  mul_.assign(static_cast<std::size_t>(m * m), -1);
  low_.assign(static_cast<std::size_t>(m * vars), -1);
  std::vector<int> s(static_cast<std::size_t>(vars));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (deg_[static_cast<std::size_t>(a)] + deg_[static_cast<std::size_t>(b)] > degree) continue;
      for (int v = 0; v < vars; ++v) {
        s[static_cast<std::size_t>(v)] = exps_[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] +
                                         exps_[static_cast<std::size_t>(b)][static_cast<std::size_t>(v)];
      }
      mul_[static_cast<std::size_t>(a * m + b)] = find(s);
    }
    for (int v = 0; v < vars; ++v) {
      if (exps_[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] == 0) continue;
      s = exps_[static_cast<std::size_t>(a)];
      --s[static_cast<std::size_t>(v)];
      low_[static_cast<std::size_t>(a * vars + v)] = find(s);
    }
  }
}

int MonomialBasis::find(const std::vector<int>& e) const {
  auto it = std::find(exps_.begin(), exps_.end(), e);
  return it == exps_.end() ? -1 : static_cast<int>(it - exps_.begin());
}

TaylorPoly::TaylorPoly(std::shared_ptr<const MonomialBasis> basis)
    : basis_(std::move(basis)), c_(static_cast<std::size_t>(basis_->size()), 0.0) {}

TaylorPoly TaylorPoly::constant(std::shared_ptr<const MonomialBasis> basis, double c) {
  TaylorPoly p(std::move(basis));
  p.c_[0] = c;
  return p;
}

TaylorPoly TaylorPoly::variable(std::shared_ptr<const MonomialBasis> basis, int var) {
  TaylorPoly p(std::move(basis));
  if (p.basis_->degree() >= 1) p.coeff(p.basis_->linear(var)) = 1.0;
  return p;
}

TaylorPoly& TaylorPoly::operator+=(const TaylorPoly& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TaylorPoly& TaylorPoly::operator-=(const TaylorPoly& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

TaylorPoly& TaylorPoly::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b) {
  TaylorPoly r(a.basis_);
  const int m = a.basis_->size();
  for (int i = 0; i < m; ++i) {
    const double ai = a.c_[static_cast<std::size_t>(i)];
    if (ai == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      const double bj = b.c_[static_cast<std::size_t>(j)];
      if (bj == 0.0) continue;
      const int k = a.basis_->product(i, j);
      if (k >= 0) r.c_[static_cast<std::size_t>(k)] += ai * bj;
    }
  }
  return r;
}

TaylorPoly TaylorPoly::partial(int var) const {
  TaylorPoly r(basis_);
  for (int i = 0; i < basis_->size(); ++i) {
    const int lo = basis_->lowered(i, var);
    if (lo < 0) continue;
    r.c_[static_cast<std::size_t>(lo)] +=
        c_[static_cast<std::size_t>(i)] * basis_->exponents(i)[static_cast<std::size_t>(var)];
  }
  return r;
}

std::vector<double> TaylorPoly::gradient() const {
  std::vector<double> g(static_cast<std::size_t>(basis_->vars()), 0.0);
  if (basis_->degree() < 1) return g;
  for (int v = 0; v < basis_->vars(); ++v) g[static_cast<std::size_t>(v)] = coeff(basis_->linear(v));
  return g;
}

TaylorPoly TaylorPoly::compose(const std::vector<double>& derivs, const TaylorPoly& p) {
  TaylorPoly dev = p;
  dev.c_[0] = 0.0;
  TaylorPoly result = constant(p.basis_, derivs.empty() ? 0.0 : derivs[0]);
  TaylorPoly power = constant(p.basis_, 1.0);
  double factorial = 1.0;
  const int top = std::min(static_cast<int>(derivs.size()) - 1, p.basis_->degree());
  for (int k = 1; k <= top; ++k) {
    power = power * dev;
    factorial *= k;
    result += power * (derivs[static_cast<std::size_t>(k)] / factorial);
  }
  return result;
}

}  // namespace parcell
