#include "sqfinsler/betaform.hpp"

#include <algorithm>
#include <cmath>

namespace sqfinsler {

double norm_squared(const FormField& beta, const MetricField& g, std::span<const double> x) {
  return norm_squared_t<double>(beta, g, x);
}

Tensor covariant_derivative(const FormField& beta, const MetricField& g, std::span<const double> x) {
  return to_tensor(covariant_derivative_t<double>(beta, g, x), Variance::lower, Variance::lower);
}

NablaBeta rs_decompose(const Tensor& bij, const MetricField& g, const FormField& beta, std::span<const double> x,
                       std::span<const double> y) {
  require(bij.rank() == 2, "rs_decompose expects b_{i|j}");
  const int n = bij.dim();
  const Tensor ainv = g.inverse_at(x);
  const std::vector<double> b = beta.at(x);

  NablaBeta nb;
  nb.bij = bij;
  nb.r = symmetrize(bij);
  nb.s = antisymmetrize(bij);
  nb.r_up = nb.r.raise(0, ainv);
  nb.s_up = nb.s.raise(0, ainv);
  nb.q = Tensor(n, {Variance::lower, Variance::lower});
  nb.t = Tensor(n, {Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double q = 0.0, t = 0.0;
      for (int m = 0; m < n; ++m) {
        q += nb.r({i, m}) * nb.s_up({m, j});
        t += nb.s({i, m}) * nb.s_up({m, j});
      }
      nb.q({i, j}) = q;
      nb.t({i, j}) = t;
    }
  }
  nb.b_up.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) nb.b_up[i] += ainv({i, j}) * b[j];
  }
  nb.b2 = dot<double>(nb.b_up, b);
  auto contract_b = [&](const Tensor& m) {
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) out[j] += nb.b_up[i] * m({i, j});
    }
    return out;
  };
  nb.r_j = contract_b(nb.r);
  nb.s_j = contract_b(nb.s);
  nb.q_j = contract_b(nb.q);
  nb.t_j = contract_b(nb.t);

  nb.s_up0.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      nb.r00 += nb.r({i, j}) * y[i] * y[j];
      nb.s_up0[i] += nb.s_up({i, j}) * y[j];
    }
    nb.s0 += nb.s_j[i] * y[i];
  }
  return nb;
}

FormField conformal_form(double mu, double k, std::vector<double> a) {
  const int n = static_cast<int>(a.size());
  require(n >= 1, "conformal form needs a non-empty vector a");
  return FormField::make(n, "conformal", [mu, k, a = std::move(a)]<class T>(std::span<const T> x) {
    require(x.size() == a.size(), "dimension of a must equal n");
    T r2(0.0), ax(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      r2 = r2 + x[i] * x[i];
      ax = ax + a[i] * x[i];
    }
    const T q = 1.0 + mu * r2;
    if (!(value_of(q) > 0.0)) throw Error(ErrorKind::outside_chart, "1 + mu|x|^2 <= 0");
    const T lead = k - mu * ax;
    const T inv = reciprocal(q * sqrt(q));
    std::vector<T> w;
    w.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w.push_back((lead * x[i] + q * a[i]) * inv);
    return w;
  });
}

ClosedConformalCheck check_closed_conformal(const FormField& omega, const MetricField& h,
                                            std::span<const std::vector<double>> samples) {
  require(!samples.empty(), "closed-conformal check needs samples");
  ClosedConformalCheck out;
  for (const auto& x : samples) {
    const Tensor w = covariant_derivative(omega, h, x);
    const Tensor hm = h.at(x);
    const double c = conformal_factor_t<double>(omega, h, x);
    out.c.push_back(c);
    const double r = (w + 2.0 * c * hm).norm() / std::max(w.norm(), 1.0);
    out.residual = std::max(out.residual, r);
    out.closedness = std::max(out.closedness, antisymmetrize(w).norm());
  }
  return out;
}

ConformalScalarData conformal_scalar_data(const FormField& omega, const MetricField& h, double mu,
                                          std::span<const double> x) {
  const int n = h.dim();
  const auto& layout = JetLayout::get(n, 2);
  std::vector<Jet1> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet1::variable(layout, i, x[i]));
  const Jet1 c = conformal_factor_t<Jet1>(omega, h, xs);

  ConformalScalarData d;
  d.c = c.base();
  d.grad.resize(n);
  for (int i = 0; i < n; ++i) d.grad[i] = c.derivative({i});

  const Mat<double> hm = h.components<double>(x);
  const Mat<double> hinv = inverse(hm);
  d.grad_norm2 = quadratic_form<double>(hinv, d.grad, d.grad);
  d.invariant = d.grad_norm2 + mu * d.c * d.c;

  const auto gamma = christoffel_t<double>(h, x);
  Tensor hess(n, {Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = c.derivative({i, j});
      for (int k = 0; k < n; ++k) v -= gamma[(k * n + i) * n + j] * d.grad[k];
      hess({i, j}) = v;
    }
  }
  const Tensor target = hess + mu * d.c * to_tensor(hm, Variance::lower, Variance::lower);
  d.hessian_residual = target.norm() / std::max(hess.norm(), 1.0);

  double laplacian = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) laplacian += hinv(i, j) * hess({i, j});
  }
  d.laplacian_residual = std::abs(laplacian + n * mu * d.c) / std::max(std::abs(laplacian), 1.0);
  return d;
}

}  // namespace sqfinsler
