#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sqfinsler/fields.hpp"
#include "sqfinsler/jet.hpp"
#include "sqfinsler/tensor.hpp"

namespace sqfinsler {

/// Chart data for the constant-curvature metric h_mu.
struct SpaceFormParams {
  double mu = 0.0;
  double r_max = 1.0;  // chart radius; 1 + mu |x|^2 > 0 on the open ball

  /// r_max = 0.99/sqrt(-mu) for mu < 0, else 1.
  static SpaceFormParams standard(double mu);
  void validate() const;
};

/// h_mu = sqrt((1+mu|x|^2)|y|^2 - mu<x,y>^2) / (1+mu|x|^2) as a_ij(x).
MetricField space_form(double mu, int dim);

/// Gamma^i_jk, flattened as (i*n + j)*n + k. Generic over the scalar so that
/// it can be differentiated further.
template <class T>
std::vector<T> christoffel_t(const MetricField& g, std::span<const T> x) {
  const int n = g.dim();
  const auto& layout = JetLayout::get(n, 1);
  std::vector<Jet<T>> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) xs.push_back(Jet<T>::variable(layout, i, x[i]));
  const Mat<Jet<T>> a = g.components<Jet<T>>(xs);

  Mat<T> a0(n);
  for (std::size_t k = 0; k < a.a.size(); ++k) a0.a[k] = a.a[k].base();
  const Mat<T> ainv = inverse(a0, ErrorKind::degenerate_metric);

  // d[(l*n + k)*n + m] = d_m a_lk
  std::vector<T> d(static_cast<std::size_t>(n) * n * n, T(0.0));
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      for (int m = 0; m < n; ++m) d[(l * n + k) * n + m] = a(l, k).derivative({m});
    }
  }
  auto da = [&](int l, int k, int m) -> const T& { return d[(l * n + k) * n + m]; };

  std::vector<T> gamma(static_cast<std::size_t>(n) * n * n, T(0.0));
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      std::vector<T> lowered(n, T(0.0));
      for (int l = 0; l < n; ++l) lowered[l] = 0.5 * (da(l, k, j) + da(l, j, k) - da(j, k, l));
      for (int i = 0; i < n; ++i) {
        T acc(0.0);
        for (int l = 0; l < n; ++l) acc = acc + ainv(i, l) * lowered[l];
        gamma[(i * n + j) * n + k] = acc;
        gamma[(i * n + k) * n + j] = acc;
      }
    }
  }
  return gamma;
}

Tensor christoffel(const MetricField& g, std::span<const double> x);

/// G^i_alpha = 1/2 Gamma^i_jk y^j y^k.
template <class T>
std::vector<T> spray_riemann_t(const MetricField& g, std::span<const T> x, std::span<const T> y) {
  const int n = g.dim();
  const auto gamma = christoffel_t<T>(g, x);
  std::vector<T> G(n, T(0.0));
  for (int i = 0; i < n; ++i) {
    T acc(0.0);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) acc = acc + gamma[(i * n + j) * n + k] * y[j] * y[k];
    }
    G[i] = 0.5 * acc;
  }
  return G;
}

std::vector<double> spray_riemann(const MetricField& g, std::span<const double> x, std::span<const double> y);

/// Spray coefficients as jets in the 2n perturbation variables (x^0..x^{n-1},
/// y^0..y^{n-1}) of the given order. `spray(xs, ys)` must accept Jet1 spans.
template <class SprayFn>
std::pair<std::vector<Jet1>, std::vector<Jet1>> spray_jets(SprayFn&& spray, std::span<const double> x,
                                                           std::span<const double> y, int order) {
  const int n = static_cast<int>(x.size());
  const auto& layout = JetLayout::get(2 * n, order);
  std::vector<Jet1> xs, ys;
  for (int i = 0; i < n; ++i) xs.push_back(Jet1::variable(layout, i, x[i]));
  for (int i = 0; i < n; ++i) ys.push_back(Jet1::variable(layout, n + i, y[i]));
  std::vector<Jet1> G = spray(std::span<const Jet1>(xs), std::span<const Jet1>(ys));
  return {std::move(G), std::move(ys)};
}

/// R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
///         - dG^i/dy^j dG^j/dy^k,
/// assembled on jets, so the result keeps (order of G) - 2 orders of
/// derivatives in (x, y).
Mat<Jet1> riemann_from_spray(const std::vector<Jet1>& G, const std::vector<Jet1>& ys);

/// Riemann curvature R^i_k of alpha, from the spray formula applied to G_alpha.
Tensor riemann_curvature_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y);

struct SectionalFit {
  double mu = 0.0;
  double residual = 0.0;
};

struct PointDirection {
  std::vector<double> x;
  std::vector<double> y;
};

/// Least-squares mu in R^i_k ~ mu (alpha^2 delta^i_k - y^i y_k) over the
/// samples; residual is the worst normalized misfit.
SectionalFit sectional_constancy_residual(const MetricField& g, std::span<const PointDirection> samples);

/// mu (alpha^2 delta^i_k - y^i a_km y^m) at (x, y).
Tensor constant_curvature_tensor(const MetricField& g, double mu, std::span<const double> x,
                                 std::span<const double> y);

}  // namespace sqfinsler
