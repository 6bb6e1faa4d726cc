#pragma once

#include <span>
#include <vector>

#include "sqfinsler/fields.hpp"
#include "sqfinsler/riemann.hpp"
#include "sqfinsler/tensor.hpp"

namespace sqfinsler {

/// b_{i|j} = d_j b_i - Gamma^k_ij b_k, generic over the scalar.
template <class T>
Mat<T> covariant_derivative_t(const FormField& beta, const MetricField& g, std::span<const T> x) {
  const int n = g.dim();
  require(beta.dim() == n, "form and metric dimensions differ");
  const auto& layout = JetLayout::get(n, 1);
  std::vector<Jet<T>> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) xs.push_back(Jet<T>::variable(layout, i, x[i]));
  const std::vector<Jet<T>> b = beta.components<Jet<T>>(xs);
  const std::vector<T> gamma = christoffel_t<T>(g, x);
  Mat<T> out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = b[i].derivative({j});
      for (int k = 0; k < n; ++k) acc = acc - gamma[(k * n + i) * n + j] * b[k].base();
      out(i, j) = acc;
    }
  }
  return out;
}

/// b^2 = a^ij b_i b_j.
template <class T>
T norm_squared_t(const FormField& beta, const MetricField& g, std::span<const T> x) {
  const Mat<T> ainv = inverse(g.components<T>(x));
  const std::vector<T> b = beta.components<T>(x);
  return quadratic_form<T>(ainv, b, b);
}

double norm_squared(const FormField& beta, const MetricField& g, std::span<const double> x);

Tensor covariant_derivative(const FormField& beta, const MetricField& g, std::span<const double> x);

/// The symmetric/antisymmetric split of b_{i|j} and the contracted scalars
/// built from it. Index conventions: T_{i0} = T_ij y^j, T_00 = T_ij y^i y^j;
/// indices are raised with a^ij.
struct NablaBeta {
  Tensor bij;  // b_{i|j}
  Tensor r;    // r_ij
  Tensor s;    // s_ij
  Tensor r_up;  // r^i_j
  Tensor s_up;  // s^i_j
  Tensor q;    // q_ij = r_im s^m_j
  Tensor t;    // t_ij = s_im s^m_j
  std::vector<double> b_up;  // b^i
  std::vector<double> r_j, s_j, q_j, t_j;
  double b2 = 0.0;
  // Contractions with the reference direction y.
  double r00 = 0.0;
  double s0 = 0.0;
  std::vector<double> s_up0;  // s^i_0
};

NablaBeta rs_decompose(const Tensor& bij, const MetricField& g, const FormField& beta, std::span<const double> x,
                       std::span<const double> y);

/// w_i = [(k - mu<a,x>) x^i + (1 + mu|x|^2) a^i] / (1 + mu|x|^2)^(3/2).
FormField conformal_form(double mu, double k, std::vector<double> a);

/// c-hat = -trace(w_{i|j} h^ij) / (2n), generic over the scalar.
template <class T>
T conformal_factor_t(const FormField& omega, const MetricField& h, std::span<const T> x) {
  const int n = h.dim();
  const Mat<T> w = covariant_derivative_t<T>(omega, h, x);
  const Mat<T> hinv = inverse(h.components<T>(x));
  T trace(0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) trace = trace + w(i, j) * hinv(i, j);
  }
  return trace * (-1.0 / (2.0 * n));
}

struct ClosedConformalCheck {
  std::vector<double> c;   // c-hat per sample point
  double residual = 0.0;   // max ||w_{i|j} + 2c h_ij|| / max(||w_{i|j}||, 1)
  double closedness = 0.0; // max ||antisymmetric part of w_{i|j}||
};

/// Checks w_{i|j} = -2c h_ij at each sample point.
ClosedConformalCheck check_closed_conformal(const FormField& omega, const MetricField& h,
                                            std::span<const std::vector<double>> samples);

/// Quantities attached to a form with r_ij = -2c h_ij on a metric of constant
/// curvature mu: the gradient of c, the would-be constant |grad c|^2 + mu c^2,
/// and the residuals of c_{i|j} + mu c h_ij = 0 and Laplacian(c) + n mu c = 0.
struct ConformalScalarData {
  double c = 0.0;
  std::vector<double> grad;     // c_i
  double grad_norm2 = 0.0;      // h^ij c_i c_j
  double invariant = 0.0;       // |grad c|^2 + mu c^2
  double hessian_residual = 0.0;
  double laplacian_residual = 0.0;
};

ConformalScalarData conformal_scalar_data(const FormField& omega, const MetricField& h, double mu,
                                          std::span<const double> x);

}  // namespace sqfinsler
