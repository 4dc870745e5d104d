#include "parcell/observability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include <Eigen/Eigenvalues>

#include "parcell/errors.hpp"
#include "parcell/taylor_poly.hpp"

namespace parcell {

namespace {

VectorXd differential_part(const PackModel& model, const VectorXd& w) {
  if (w.size() == model.nw()) return w.head(model.nx());
  if (w.size() == model.nx()) return w;
  throw Error(ErrorCode::InvalidArgument,
              "expected a state of length " + std::to_string(model.nx()) + " or " +
                  std::to_string(model.nw()) + ", got " + std::to_string(w.size()));
}

double ocv_slope(const PackModel& model, int k, double z) {
  return model.cell(k).curve().derivative(z, 1);
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Observable: return "Observable";
    case Verdict::Unobservable: return "Unobservable";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

MatrixXd theta_jacobian(const PackModel& model, const VectorXd& x) {
  const int n = model.n();
  const int nx = model.nx();
  MatrixXd j = MatrixXd::Zero(model.nw(), model.nw());
  const double s1 = ocv_slope(model, 0, x(0));
  for (int k = 1; k < n; ++k) {
    j(nx + k - 1, 0) = s1;
    j(nx + k - 1, 2 * k) = -ocv_slope(model, k, x(2 * k));
  }
  return j;
}

MatrixXd phi_jacobian(const PackModel& model, const VectorXd& x) {
  MatrixXd j = MatrixXd::Zero(model.n(), model.nw());
  for (int k = 0; k < model.n(); ++k) j(k, 2 * k) = ocv_slope(model, k, x(2 * k));
  return j;
}

VectorXd consistent_point(const PackModel& model, const VectorXd& x, double i_total) {
  VectorXd w(model.nw());
  w << x, model.solve_algebraic(x, i_total);
  return w;
}

LinearizedSystem linearize(const PackModel& model, const VectorXd& w_bar) {
  const VectorXd x = differential_part(model, w_bar);
  LinearizedSystem lin;
  lin.f_mat = model.a_mat() + theta_jacobian(model, x);
  lin.c_mat = model.h_mat() + phi_jacobian(model, x);
  lin.e_mat = model.e_mat();
  lin.linearization_point = w_bar.size() == model.nw() ? w_bar : consistent_point(model, x);
  return lin;
}

CObservabilityResult check_c_observability(const LinearizedSystem& lin, double rank_tol) {
  const Eigen::Index nw = lin.e_mat.rows();
  const Eigen::Index ny = lin.c_mat.rows();
  CObservabilityResult res;

  MatrixXd ec(nw + ny, nw);
  ec << lin.e_mat, lin.c_mat;
  res.c1_singular_values = singular_values(ec);
  res.c1_rank = rank_from_singular_values(res.c1_singular_values, rank_tol);
  res.c1 = res.c1_rank == nw;

  // Finite eigenvalues of the pencil F v = s E v; infinite ones have beta ~ 0.
  Eigen::GeneralizedEigenSolver<MatrixXd> ges(lin.f_mat, lin.e_mat, false);
  if (ges.info() != Eigen::Success) {
    res.solver_failed = true;
    return res;
  }
  const Eigen::VectorXcd alphas = ges.alphas();
  const Eigen::VectorXd betas = ges.betas();
  const double scale = std::max(1.0, lin.f_mat.norm());
  Eigen::MatrixXcd pencil(nw + ny, nw);
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    if (std::abs(betas(i)) <= 1e-10 * std::max(scale, std::abs(alphas(i)))) {
      ++res.infinite_eigenvalues;
      continue;
    }
    const std::complex<double> s = alphas(i) / betas(i);
    pencil.topRows(nw) = s * lin.e_mat.cast<std::complex<double>>() -
                         lin.f_mat.cast<std::complex<double>>();
    pencil.bottomRows(ny) = lin.c_mat.cast<std::complex<double>>();
    const Eigen::VectorXd sv = singular_values(pencil);
    res.c2_results.push_back({s, rank_from_singular_values(sv, rank_tol), sv(sv.size() - 1)});
  }
  res.c2 = std::all_of(res.c2_results.begin(), res.c2_results.end(),
                       [nw](const PencilEigenvalue& p) { return p.rank == nw; });
  return res;
}

namespace {

struct Word {
  std::vector<int> fields;  // innermost first; 0 = f, 1 = g
  std::string label;
};

std::vector<Word> lie_words(int max_order) {
  std::vector<Word> all{{{}, "h"}};
  std::vector<Word> layer = all;
  for (int s = 1; s <= max_order; ++s) {
    std::vector<Word> next;
    for (const Word& w : layer) {
      for (int v = 0; v < 2; ++v) {
        Word nw = w;
        nw.fields.push_back(v);
        nw.label = std::string(v == 0 ? "L_f " : "L_g ") + w.label;
        next.push_back(std::move(nw));
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return all;
}

LieMatrix lie_taylor(const PackModel& model, const VectorXd& x0, int max_order) {
  const int n = model.n();
  const int nx = model.nx();
  const int degree = max_order + 1;
  for (int k = 0; k < n; ++k) {
    if (model.cell(k).curve().max_derivative_order() < degree) {
      throw Error(ErrorCode::DerivativeUnavailable,
                  "Lie analysis of order " + std::to_string(max_order) +
                      " needs OCV derivatives up to order " + std::to_string(degree) +
                      "; cell " + std::to_string(k + 1) + " provides " +
                      std::to_string(model.cell(k).curve().max_derivative_order()));
    }
  }
  auto basis = std::make_shared<const MonomialBasis>(nx, degree);

  std::vector<TaylorPoly> xs;
  for (int i = 0; i < nx; ++i) {
    xs.push_back(TaylorPoly::constant(basis, x0(i)) + TaylorPoly::variable(basis, i));
  }
  std::vector<TaylorPoly> ocv;
  for (int k = 0; k < n; ++k) {
    std::vector<double> d(static_cast<std::size_t>(degree) + 1);
    for (int l = 0; l <= degree; ++l) {
      d[static_cast<std::size_t>(l)] = model.cell(k).curve().derivative(x0(2 * k), l);
    }
    ocv.push_back(TaylorPoly::compose(d, xs[static_cast<std::size_t>(2 * k)]));
  }
  std::vector<TaylorPoly> theta(static_cast<std::size_t>(n), TaylorPoly(basis));
  for (int j = 1; j < n; ++j) theta[static_cast<std::size_t>(j - 1)] = ocv[0] - ocv[static_cast<std::size_t>(j)];

  const MatrixXd& fl = model.reduced_linear();
  const MatrixXd& cp = model.reduced_coupling();
  std::vector<TaylorPoly> f(static_cast<std::size_t>(nx), TaylorPoly(basis));
  std::vector<TaylorPoly> g;
  for (int i = 0; i < nx; ++i) {
    auto& fi = f[static_cast<std::size_t>(i)];
    for (int j = 0; j < nx; ++j) fi += xs[static_cast<std::size_t>(j)] * fl(i, j);
    for (int j = 0; j < n; ++j) fi += theta[static_cast<std::size_t>(j)] * cp(i, j);
    g.push_back(TaylorPoly::constant(basis, model.reduced_g()(i)));
  }
  TaylorPoly h = ocv[0];
  for (int j = 0; j < nx; ++j) h += xs[static_cast<std::size_t>(j)] * model.reduced_h_linear_row()(j);
  for (int j = 0; j < n; ++j) h += theta[static_cast<std::size_t>(j)] * model.reduced_h_ocv_row()(j);

  auto lie = [&](const TaylorPoly& p, const std::vector<TaylorPoly>& field) {
    TaylorPoly r(basis);
    for (int i = 0; i < nx; ++i) r += p.partial(i) * field[static_cast<std::size_t>(i)];
    return r;
  };

  const std::vector<Word> words = lie_words(max_order);
  LieMatrix out;
  out.rows.resize(static_cast<Eigen::Index>(words.size()), nx);
  // Words are generated layer by layer, so each word's parent appears earlier.
  std::vector<TaylorPoly> polys;
  polys.reserve(words.size());
  polys.push_back(h);
  std::size_t parent = 0;
  for (std::size_t w = 1; w < words.size(); ++w) {
    const int v = words[w].fields.back();
    polys.push_back(lie(polys[parent], v == 0 ? f : g));
    if (v == 1) ++parent;
  }
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto grad = polys[w].gradient();
    for (int i = 0; i < nx; ++i) out.rows(static_cast<Eigen::Index>(w), i) = grad[static_cast<std::size_t>(i)];
    out.labels.push_back(words[w].label);
  }
  return out;
}

LieMatrix lie_central_difference(const PackModel& model, const VectorXd& x0, int max_order,
                                 double step) {
  const int nx = model.nx();
  using Scalar = std::function<double(const VectorXd&)>;
  auto gradient = [nx, step](const Scalar& fn, const VectorXd& x) {
    VectorXd g(nx);
    for (int i = 0; i < nx; ++i) {
      VectorXd xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      g(i) = (fn(xp) - fn(xm)) / (2.0 * step);
    }
    return g;
  };
  std::function<double(const std::vector<int>&, std::size_t, const VectorXd&)> value =
      [&](const std::vector<int>& fields, std::size_t len, const VectorXd& x) -> double {
    if (len == 0) return model.reduced_h(x);
    const Scalar inner = [&, len](const VectorXd& y) { return value(fields, len - 1, y); };
    const VectorXd field = fields[len - 1] == 0 ? model.reduced_f(x) : model.reduced_g();
    return gradient(inner, x).dot(field);
  };

  const std::vector<Word> words = lie_words(max_order);
  LieMatrix out;
  out.rows.resize(static_cast<Eigen::Index>(words.size()), nx);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& fields = words[w].fields;
    const Scalar fn = [&](const VectorXd& y) { return value(fields, fields.size(), y); };
    out.rows.row(static_cast<Eigen::Index>(w)) = gradient(fn, x0).transpose();
    out.labels.push_back(words[w].label);
  }
  return out;
}

}  // namespace

LieMatrix lie_observability_matrix(const PackModel& model, const VectorXd& x0,
                                   const LieOptions& opts) {
  if (x0.size() != model.nx()) {
    throw Error(ErrorCode::InvalidArgument, "x0 must have length 2n");
  }
  if (opts.max_order < 0) throw Error(ErrorCode::InvalidArgument, "negative Lie order");
  if (opts.max_order > kMaxLieOrder) {
    throw Error(ErrorCode::OrderTooHigh, "Lie order " + std::to_string(opts.max_order) +
                                             " exceeds the supported maximum " +
                                             std::to_string(kMaxLieOrder));
  }
  if (opts.method == LieMethod::CentralDifference) {
    if (opts.max_order > 2) {
      throw Error(ErrorCode::OrderTooHigh,
                  "nested central differences are limited to order 2");
    }
    return lie_central_difference(model, x0, opts.max_order, opts.fd_step);
  }
  return lie_taylor(model, x0, opts.max_order);
}

PathologyReport check_pathologies(const PackModel& model, const VectorXd& x0, double rel_tol,
                                  double abs_tol) {
  if (model.n() != 2) {
    throw Error(ErrorCode::UnsupportedN,
                "pathology conditions are stated for two cells; use the numerical rank test");
  }
  if (x0.size() != model.nx()) throw Error(ErrorCode::InvalidArgument, "x0 must have length 4");
  auto close = [rel_tol](double a, double b) {
    return std::abs(a - b) <= rel_tol * std::max({1e-300, std::abs(a), std::abs(b)});
  };
  auto close_abs = [rel_tol, abs_tol](double a, double b) {
    return std::abs(a - b) <= std::max(abs_tol, rel_tol * std::max(std::abs(a), std::abs(b)));
  };
  const CellParams& c1 = model.cell(0);
  const CellParams& c2 = model.cell(1);
  PathologyReport rep;

  if (close(c1.r2 * c1.c, c2.r2 * c2.c) && close(c1.r1 * c1.q, c2.r1 * c2.q) &&
      close(c1.r1 * c1.c, c2.r1 * c2.c)) {
    rep.triggered.push_back(Pathology::EquivalentParameters);
  }

  const double z1 = x0(0), z2 = x0(2);
  const bool slopes_known = c1.curve().max_derivative_order() >= 1 &&
                            c2.curve().max_derivative_order() >= 1;
  if (close_abs(c1.curve().value(z1), c2.curve().value(z2)) &&
      (!slopes_known || close_abs(c1.curve().derivative(z1, 1), c2.curve().derivative(z2, 1)))) {
    rep.triggered.push_back(Pathology::MatchingOcv);
  }

  const int order = std::min({kMaxLieOrder, c1.curve().max_derivative_order(),
                              c2.curve().max_derivative_order()});
  rep.checked_derivative_order = order;
  bool vanishing = false;
  for (int k = 0; k < 2 && !vanishing; ++k) {
    for (int l = 1; l <= order; ++l) {
      if (std::abs(model.cell(k).curve().derivative(x0(2 * k), l)) <= abs_tol) {
        vanishing = true;
        break;
      }
    }
  }
  if (vanishing) rep.triggered.push_back(Pathology::VanishingOcvDerivative);
  return rep;
}

ObservabilityReport analyze_observability(const PackModel& model, const VectorXd& x0,
                                          const ObservabilityOptions& opts) {
  if (x0.size() != model.nx()) throw Error(ErrorCode::InvalidArgument, "x0 must have length 2n");
  ObservabilityReport rep;
  rep.n = model.n();
  rep.x0 = x0;
  const int nx = model.nx();

  if (opts.test != ObservabilityTest::Lie) {
    try {
      const LinearizedSystem lin = linearize(model, consistent_point(model, x0, opts.i_total));
      const CObservabilityResult c = check_c_observability(lin, opts.rank_tol);
      rep.c1_rank = c.c1_rank;
      rep.c1 = c.c1;
      rep.c2 = c.c2;
      rep.c2_results = c.c2_results;
      if (c.solver_failed) {
        rep.notes.emplace_back("generalized eigenvalue solver failed; C.2 not evaluated");
        rep.linear_verdict = Verdict::Indeterminate;
      } else {
        rep.linear_verdict = (c.c1 && c.c2) ? Verdict::Observable : Verdict::Unobservable;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DerivativeUnavailable) throw;
      rep.notes.emplace_back(std::string("linearized test skipped: ") + e.what());
    }
  }

  if (opts.test != ObservabilityTest::Linearized) {
    try {
      const LieMatrix lm = lie_observability_matrix(model, x0, opts.lie);
      rep.lie_singular_values = singular_values(lm.rows);
      rep.lie_rank = rank_from_singular_values(rep.lie_singular_values, opts.rank_tol);
      rep.lie_labels = lm.labels;
      rep.lie_verdict = rep.lie_rank == nx ? Verdict::Observable : Verdict::Unobservable;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DerivativeUnavailable) throw;
      rep.notes.emplace_back(std::string("Lie test skipped: ") + e.what());
    }
  }

  if (model.n() == 2) {
    const PathologyReport p = check_pathologies(model, x0);
    for (Pathology t : p.triggered) rep.triggered_conditions.push_back(static_cast<int>(t));
    rep.pathology_order_checked = p.checked_derivative_order;
    rep.notes.push_back("vanishing-derivative condition checked up to order " +
                        std::to_string(p.checked_derivative_order));
  } else {
    rep.notes.emplace_back("pathology conditions only apply to two cells; numerical rank only");
  }

  const bool any_obs =
      rep.linear_verdict == Verdict::Observable || rep.lie_verdict == Verdict::Observable;
  const bool any_indet =
      (opts.test != ObservabilityTest::Lie && rep.linear_verdict == Verdict::Indeterminate) ||
      (opts.test != ObservabilityTest::Linearized && rep.lie_verdict == Verdict::Indeterminate);
  rep.verdict = any_obs ? Verdict::Observable
                        : (any_indet ? Verdict::Indeterminate : Verdict::Unobservable);
  return rep;
}

}  // namespace parcell
