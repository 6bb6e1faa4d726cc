#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqfinsler/betaform.hpp"
#include "sqfinsler/fields.hpp"
#include "sqfinsler/riemann.hpp"
#include "sqfinsler/tensor.hpp"

namespace sqfinsler {

struct Guards {
  double eps_s = 0.05;  // keeps |1 - s| and 1 + 2b^2 - 3s^2 away from zero
  double eps_F = 0.05;  // minimum of 1 + s
  bool operator==(const Guards&) const = default;
};

/// The square metric F = (alpha + beta)^2 / alpha.
class SquareMetricModel {
 public:
  SquareMetricModel(MetricField alpha, FormField beta, Guards guards = {});

  const MetricField& alpha() const { return alpha_; }
  const FormField& beta() const { return beta_; }
  const Guards& guards() const { return guards_; }
  int dim() const { return alpha_.dim(); }

  /// F^2 = (alpha + beta)^4 / alpha^2 on any scalar.
  template <class T>
  T F2(std::span<const T> x, std::span<const T> y) const {
    const Mat<T> a = alpha_.components<T>(x);
    const std::vector<T> b = beta_.components<T>(x);
    const T alpha2 = quadratic_form<T>(a, y, y);
    const T t = sqrt(alpha2) + dot<T>(b, y);
    const T t2 = t * t;
    return t2 * t2 / alpha2;
  }

  /// s = beta/alpha and b^2 at (x, y).
  double s(std::span<const double> x, std::span<const double> y) const;
  double b2(std::span<const double> x) const;

  /// Throws outside_regular_cone naming the first violated guard.
  void check_admissible(std::span<const double> x, std::span<const double> y) const;
  bool admissible(std::span<const double> x, std::span<const double> y) const;

 private:
  MetricField alpha_;
  FormField beta_;
  Guards guards_;
};

struct FinslerValue {
  double F = 0.0;
  Tensor g;  // g_ij
};

FinslerValue evaluate(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

/// G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}), generic over the scalar.
template <class T>
std::vector<T> spray_generic_t(const SquareMetricModel& model, std::span<const T> x, std::span<const T> y) {
  const int n = model.dim();
  const auto& layout = JetLayout::get(2 * n, 2);
  std::vector<Jet<T>> xs, ys;
  xs.reserve(n);
  ys.reserve(n);
  for (int i = 0; i < n; ++i) xs.push_back(Jet<T>::variable(layout, i, x[i]));
  for (int i = 0; i < n; ++i) ys.push_back(Jet<T>::variable(layout, n + i, y[i]));
  const Jet<T> E = model.F2<Jet<T>>(xs, ys);

  Mat<T> g(n);
  std::vector<T> rhs(n, T(0.0));
  for (int l = 0; l < n; ++l) {
    for (int m = l; m < n; ++m) {
      g(l, m) = 0.5 * E.derivative({n + l, n + m});
      g(m, l) = g(l, m);
    }
    T acc = -E.derivative({l});
    for (int k = 0; k < n; ++k) acc = acc + E.derivative({k, n + l}) * y[k];
    rhs[l] = 0.25 * acc;
  }
  return solve(std::move(g), std::move(rhs), ErrorKind::degenerate_fundamental_tensor);
}

std::vector<double> spray_generic(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

/// The closed-form spray of the square metric with Q = 2/(1 - s).
std::vector<double> spray_closed_form(const SquareMetricModel& F, std::span<const double> x,
                                      std::span<const double> y);

Tensor riemann_curvature(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

struct WeylData {
  Tensor R;  // R^i_k
  Tensor A;  // A^i_k = R^i_k - R delta^i_k, R = Ric/(n-1)
  Tensor W;  // W^i_k
  double ric = 0.0;
};

WeylData weyl(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

/// D^i_hjk stored with index order (i, h, j, k).
Tensor douglas(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

struct FlagExtract {
  double K = 0.0;
  double residual = 0.0;
};

/// K = Ric/((n-1)F^2) and ||R - K(F^2 delta - y^i y_k)|| / max(||R||, F^2), y_k = g_km y^m.
FlagExtract flag_curvature_extract(const SquareMetricModel& F, std::span<const double> x,
                                   std::span<const double> y);

double projective_flatness_residual(std::span<const double> G, std::span<const double> y);
double projective_flatness_residual(const SquareMetricModel& F, std::span<const double> x,
                                    std::span<const double> y);

struct CurvatureResiduals {
  double spray_match = 0.0;
  double weyl = 0.0;
  double douglas = 0.0;
  double scalar_flag = 0.0;
  double proj_flat = 0.0;
};

struct CurvatureBundle {
  double F = 0.0;
  std::vector<double> G;
  Tensor R;
  double ric = 0.0;
  double R_scalar = 0.0;
  Tensor A;
  Tensor W;  // empty when n < 3
  Tensor D;
  double K = 0.0;
  CurvatureResiduals residuals;
};

/// Everything at one admissible (x, y). The Weyl residual is reported as 0
/// for n < 3, where the tensor is not defined.
CurvatureBundle curvature_bundle(const SquareMetricModel& F, std::span<const double> x, std::span<const double> y);

}  // namespace sqfinsler
