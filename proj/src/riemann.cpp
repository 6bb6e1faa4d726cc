#include "sqfinsler/riemann.hpp"

#include <algorithm>
#include <cmath>

namespace sqfinsler {

SpaceFormParams SpaceFormParams::standard(double mu) {
  SpaceFormParams p;
  p.mu = mu;
  p.r_max = mu < 0.0 ? 0.99 / std::sqrt(-mu) : 1.0;
  return p;
}

void SpaceFormParams::validate() const {
  require(r_max > 0.0, "space form chart radius must be positive");
  if (mu < 0.0) require(r_max < 1.0 / std::sqrt(-mu), "space form chart radius must satisfy r_max < 1/sqrt(-mu)");
}

MetricField space_form(double mu, int dim) {
  require(dim >= 1, "space form dimension must be positive");
  return MetricField::make(dim, MetricFamily::space_form, "space-form", [mu, dim]<class T>(std::span<const T> x) {
    T r2(0.0);
    for (const auto& xi : x) r2 = r2 + xi * xi;
    const T q = 1.0 + mu * r2;
    if (!(value_of(q) > 0.0)) throw Error(ErrorKind::outside_chart, "1 + mu|x|^2 <= 0");
    const T inv_q2 = reciprocal(q * q);
    std::vector<T> a(static_cast<std::size_t>(dim) * dim, T(0.0));
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        T v = -mu * (x[i] * x[j]);
        if (i == j) v = v + q;
        v = v * inv_q2;
        a[i * dim + j] = v;
        a[j * dim + i] = v;
      }
    }
    return a;
  });
}

Tensor christoffel(const MetricField& g, std::span<const double> x) {
  const int n = g.dim();
  return Tensor(n, {Variance::upper, Variance::lower, Variance::lower}, christoffel_t<double>(g, x));
}

std::vector<double> spray_riemann(const MetricField& g, std::span<const double> x, std::span<const double> y) {
  require(norm(y) > 0.0, "spray requires a nonzero direction");
  return spray_riemann_t<double>(g, x, y);
}

Mat<Jet1> riemann_from_spray(const std::vector<Jet1>& G, const std::vector<Jet1>& ys) {
  const int n = static_cast<int>(G.size());
  std::vector<Jet1> gx(n * n), gy(n * n), gxy(n * n * n), gyy(n * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gx[i * n + j] = G[i].partial(j);
      gy[i * n + j] = G[i].partial(n + j);
    }
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        gxy[(i * n + j) * n + k] = gx[i * n + j].partial(n + k);
        gyy[(i * n + j) * n + k] = gy[i * n + j].partial(n + k);
      }
    }
  }
  Mat<Jet1> R(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      Jet1 acc = 2.0 * gx[i * n + k];
      for (int j = 0; j < n; ++j) {
        acc -= ys[j] * gxy[(i * n + j) * n + k];
        acc += 2.0 * (G[j] * gyy[(i * n + j) * n + k]);
        acc -= gy[i * n + j] * gy[j * n + k];
      }
      R(i, k) = acc;
    }
  }
  return R;
}

Tensor riemann_curvature_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y) {
  require(norm(y) > 0.0, "curvature requires a nonzero direction");
  const int n = g.dim();
  auto [G, ys] = spray_jets(
      [&g](std::span<const Jet1> xs, std::span<const Jet1> yv) { return spray_riemann_t<Jet1>(g, xs, yv); }, x, y,
      2);
  const Mat<Jet1> R = riemann_from_spray(G, ys);
  Tensor out(n, {Variance::upper, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) out({i, k}) = R(i, k).base();
  }
  return out;
}

Tensor constant_curvature_tensor(const MetricField& g, double mu, std::span<const double> x,
                                 std::span<const double> y) {
  const int n = g.dim();
  const Mat<double> a = g.components<double>(x);
  const auto ylow = mat_vec<double>(a, y);
  const double alpha2 = dot<double>(ylow, y);
  Tensor out(n, {Variance::upper, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) out({i, k}) = mu * ((i == k ? alpha2 : 0.0) - y[i] * ylow[k]);
  }
  return out;
}

SectionalFit sectional_constancy_residual(const MetricField& g, std::span<const PointDirection> samples) {
  require(!samples.empty(), "sectional constancy needs samples");
  std::vector<Tensor> curv, shape;
  std::vector<double> alpha2;
  double num = 0.0, den = 0.0;
  for (const auto& s : samples) {
    Tensor R = riemann_curvature_alpha(g, s.x, s.y);
    Tensor P = constant_curvature_tensor(g, 1.0, s.x, s.y);
    for (std::size_t k = 0; k < R.entries().size(); ++k) {
      num += R.entries()[k] * P.entries()[k];
      den += P.entries()[k] * P.entries()[k];
    }
    const Mat<double> a = g.components<double>(s.x);
    alpha2.push_back(quadratic_form<double>(a, s.y, s.y));
    curv.push_back(std::move(R));
    shape.push_back(std::move(P));
  }
  SectionalFit fit;
  fit.mu = den > 0.0 ? num / den : 0.0;
  for (std::size_t s = 0; s < curv.size(); ++s) {
    const double scale = std::max(curv[s].norm(), alpha2[s]);
    const double r = (curv[s] - fit.mu * shape[s]).norm() / (scale > 0.0 ? scale : 1.0);
    fit.residual = std::max(fit.residual, r);
  }
  return fit;
}

}  // namespace sqfinsler
