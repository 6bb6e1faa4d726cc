#include "sqfinsler/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sqfinsler {

SquareMetricModel::SquareMetricModel(MetricField alpha, FormField beta, Guards guards)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), guards_(guards) {
  require(alpha_.dim() == beta_.dim(), "alpha and beta dimensions differ");
  require(alpha_.dim() >= 2, "square metric needs n >= 2");
  require(guards_.eps_s > 0.0 && guards_.eps_F > 0.0, "guards must be positive");
}

double SquareMetricModel::s(std::span<const double> x, std::span<const double> y) const {
  const Mat<double> a = alpha_.components<double>(x);
  const std::vector<double> b = beta_.at(x);
  return dot<double>(b, y) / std::sqrt(quadratic_form<double>(a, y, y));
}

double SquareMetricModel::b2(std::span<const double> x) const { return norm_squared(beta_, alpha_, x); }

void SquareMetricModel::check_admissible(std::span<const double> x, std::span<const double> y) const {
  require(static_cast<int>(x.size()) == dim() && static_cast<int>(y.size()) == dim(), "point dimension");
  require(norm(y) > 0.0, "direction must be nonzero");
  if (!alpha_.positive_definite_at(x)) throw Error(ErrorKind::degenerate_metric, "alpha is not positive definite");
  const double b2v = b2(x);
  if (!(b2v < 1.0)) throw Error(ErrorKind::outside_regular_cone, "guard b^2 < 1 violated");
  const double sv = s(x, y);
  if (!(std::abs(1.0 - sv) > guards_.eps_s)) throw Error(ErrorKind::outside_regular_cone, "guard |1 - s| > eps_s violated");
  if (!(1.0 + 2.0 * b2v - 3.0 * sv * sv > guards_.eps_s)) {
    throw Error(ErrorKind::outside_regular_cone, "guard 1 + 2b^2 - 3s^2 > eps_s violated");
  }
  if (!(1.0 + sv > guards_.eps_F)) throw Error(ErrorKind::outside_regular_cone, "guard 1 + s > eps_F violated");
}

bool SquareMetricModel::admissible(std::span<const double> x, std::span<const double> y) const {
  try {
    check_admissible(x, y);
    return true;
  } catch (const Error&) {
    return false;
  }
}

FinslerValue evaluate(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  F.check_admissible(x, y);
  const int n = F.dim();
  const auto& layout = JetLayout::get(n, 2);
  std::vector<Jet1> ys;
  for (int i = 0; i < n; ++i) ys.push_back(Jet1::variable(layout, i, y[i]));
  std::vector<Jet1> xs(x.begin(), x.end());
  const Jet1 E = F.F2<Jet1>(xs, ys);
  FinslerValue v;
  v.F = std::sqrt(E.base());
  v.g = Tensor(n, {Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) v.g({i, j}) = 0.5 * E.derivative({i, j});
  }
  return v;
}

std::vector<double> spray_generic(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  F.check_admissible(x, y);
  return spray_generic_t<double>(F, x, y);
}

std::vector<double> spray_closed_form(const SquareMetricModel& F, std::span<const double> x,
                                      std::span<const double> y) {
  F.check_admissible(x, y);
  const int n = F.dim();
  const Mat<double> a = F.alpha().components<double>(x);
  const std::vector<double> b = F.beta().at(x);
  const double alpha = std::sqrt(quadratic_form<double>(a, y, y));
  const double s = dot<double>(b, y) / alpha;
  const NablaBeta nb = rs_decompose(covariant_derivative(F.beta(), F.alpha(), x), F.alpha(), F.beta(), x, y);
  const double Q = 2.0 / (1.0 - s);
  const double denom = 1.0 + 2.0 * nb.b2 - 3.0 * s * s;
  const double bracket = nb.r00 - 2.0 * alpha * Q * nb.s0;

  std::vector<double> G = spray_riemann_t<double>(F.alpha(), x, y);
  for (int i = 0; i < n; ++i) {
    G[i] += Q * alpha * nb.s_up0[i];
    G[i] += ((1.0 - 2.0 * s) / alpha * y[i] + nb.b_up[i]) / denom * bracket;
  }
  return G;
}

namespace {

auto generic_spray_fn(const SquareMetricModel& F) {
  return [&F](std::span<const Jet1> xs, std::span<const Jet1> ys) { return spray_generic_t<Jet1>(F, xs, ys); };
}

Tensor base_tensor(const Mat<Jet1>& m) {
  Tensor t(m.n, {Variance::upper, Variance::lower});
  for (int i = 0; i < m.n; ++i) {
    for (int k = 0; k < m.n; ++k) t({i, k}) = m(i, k).base();
  }
  return t;
}

double trace(const Tensor& t) {
  double acc = 0.0;
  for (int i = 0; i < t.dim(); ++i) acc += t({i, i});
  return acc;
}

WeylData weyl_unchecked(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  const int n = F.dim();
  auto [G, ys] = spray_jets(generic_spray_fn(F), x, y, 3);
  const Mat<Jet1> R = riemann_from_spray(G, ys);
  Jet1 ric(0.0);
  for (int m = 0; m < n; ++m) ric += R(m, m);
  Mat<Jet1> A = R;
  for (int i = 0; i < n; ++i) A(i, i) -= ric / static_cast<double>(n - 1);

  WeylData out;
  out.R = base_tensor(R);
  out.A = base_tensor(A);
  out.ric = ric.base();
  out.W = out.A;
  for (int k = 0; k < n; ++k) {
    double div = 0.0;
    for (int m = 0; m < n; ++m) div += A(m, k).derivative({n + m});
    for (int i = 0; i < n; ++i) out.W({i, k}) -= div * y[i] / (n + 1);
  }
  return out;
}

}  // namespace

Tensor riemann_curvature(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  F.check_admissible(x, y);
  auto [G, ys] = spray_jets(generic_spray_fn(F), x, y, 2);
  return base_tensor(riemann_from_spray(G, ys));
}

WeylData weyl(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  require(F.dim() >= 3, "Weyl curvature needs n >= 3");
  F.check_admissible(x, y);
  return weyl_unchecked(F, x, y);
}

Tensor douglas(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  F.check_admissible(x, y);
  const int n = F.dim();
  // Outer level: third-order jets in y. Middle level: first-order jets in y,
  // used only for the trace dG^m/dy^m. The spray adds the innermost level.
  const auto& outer = JetLayout::get(n, 3);
  const auto& middle = JetLayout::get(n, 1);
  std::vector<Jet2> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.emplace_back(x[i]);
    ys.push_back(Jet2::variable(outer, i, Jet1::variable(middle, i, y[i])));
  }
  const std::vector<Jet2> G = spray_generic_t<Jet2>(F, xs, ys);

  auto outer_jet = [&](const Jet2& g, int trace_var) {
    std::vector<double> c;
    for (const Jet1& coeff : g.coefficients()) c.push_back(trace_var < 0 ? coeff.base() : coeff.derivative({trace_var}));
    if (g.is_constant()) c.resize(outer.size(), 0.0);
    return Jet1::from_coefficients(&outer, std::move(c));
  };
  Jet1 tr(0.0);
  for (int m = 0; m < n; ++m) tr += outer_jet(G[m], m);

  Tensor D(n, {Variance::upper, Variance::lower, Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    const Jet1 H = outer_jet(G[i], -1) - tr * Jet1::variable(outer, i, y[i]) / static_cast<double>(n + 1);
    for (int h = 0; h < n; ++h) {
      for (int j = h; j < n; ++j) {
        for (int k = j; k < n; ++k) {
          const double v = H.derivative({h, j, k});
          const int perms[6][3] = {{h, j, k}, {h, k, j}, {j, h, k}, {j, k, h}, {k, h, j}, {k, j, h}};
          for (const auto& p : perms) D({i, p[0], p[1], p[2]}) = v;
        }
      }
    }
  }
  return D;
}

namespace {

FlagExtract flag_from(const Tensor& R, double F, const Tensor& g, std::span<const double> y) {
  const int n = R.dim();
  const double F2 = F * F;
  FlagExtract out;
  out.K = trace(R) / ((n - 1) * F2);
  Tensor misfit = R;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double yk = 0.0;
      for (int m = 0; m < n; ++m) yk += g({k, m}) * y[m];
      misfit({i, k}) -= out.K * ((i == k ? F2 : 0.0) - y[i] * yk);
    }
  }
  out.residual = misfit.norm() / std::max(R.norm(), F2);
  return out;
}

}  // namespace

FlagExtract flag_curvature_extract(const SquareMetricModel& F, std::span<const double> x,
                                   std::span<const double> y) {
  const FinslerValue v = evaluate(F, x, y);
  return flag_from(riemann_curvature(F, x, y), v.F, v.g, y);
}

double projective_flatness_residual(std::span<const double> G, std::span<const double> y) {
  const std::size_t n = G.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(G[i] * y[j] - G[j] * y[i]));
  }
  return worst / std::max(norm(G) * norm(y), 1.0);
}

double projective_flatness_residual(const SquareMetricModel& F, std::span<const double> x,
                                    std::span<const double> y) {
  return projective_flatness_residual(spray_generic(F, x, y), y);
}

CurvatureBundle curvature_bundle(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y) {
  const int n = F.dim();
  const FinslerValue v = evaluate(F, x, y);
  CurvatureBundle out;
  out.F = v.F;
  out.G = spray_generic_t<double>(F, x, y);
  const std::vector<double> closed = spray_closed_form(F, x, y);
  std::vector<double> diff(n);
  for (int i = 0; i < n; ++i) diff[i] = out.G[i] - closed[i];
  const double scale = std::max(norm(out.G), norm(closed));
  out.residuals.spray_match = scale > 0.0 ? norm(diff) / scale : 0.0;

  if (n >= 3) {
    WeylData w = weyl_unchecked(F, x, y);
    out.R = std::move(w.R);
    out.A = std::move(w.A);
    out.W = std::move(w.W);
    out.ric = w.ric;
    out.residuals.weyl = out.W.norm() / std::max(out.R.norm(), 1.0);
  } else {
    out.R = riemann_curvature(F, x, y);
    out.ric = trace(out.R);
    out.A = out.R;
    for (int i = 0; i < n; ++i) out.A({i, i}) -= out.ric / (n - 1);
  }
  out.R_scalar = out.ric / (n - 1);

  out.D = douglas(F, x, y);
  out.residuals.douglas = out.D.norm();

  const FlagExtract flag = flag_from(out.R, out.F, v.g, y);
  out.K = flag.K;
  out.residuals.scalar_flag = flag.residual;
  out.residuals.proj_flat = projective_flatness_residual(out.G, y);
  return out;
}

}  // namespace sqfinsler
