#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqfinsler/betaform.hpp"
#include "sqfinsler/finsler.hpp"

namespace sqfinsler {

/// Fitted coefficients of the scalar-flag-curvature conditions
///   b_{i|j} = tau ((1 + 2b^2) a_ij - 3 b_i b_j)
///   Rbar^i_k = lambda (alpha^2 delta - y^i y_k) + 2 eta (beta^2 delta + alpha^2 b^i b_k - beta b^i y_k - beta b_k y^i)
///   d tau / dx^i = u b_i
/// together with eta = lambda + 4(2 + b^2) tau^2 and u = -(7 + 4b^2) tau^2 - lambda.
struct Theorem1Residuals {
  double tau = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
  double u = 0.0;
  double b2 = 0.0;
  std::vector<double> grad_tau;
  // With b ~ 0 the eta term and the quotient for u carry no information.
  bool eta_indeterminate = false;
  bool u_indeterminate = false;
  double residual_y1 = 0.0;
  double residual_y2 = 0.0;
  double residual_y3 = 0.0;
  double residual_qq_eta = 0.0;
  double residual_qq_u = 0.0;

  double max_residual() const;
};

/// Below this b^2 the quantities eta and u are reported indeterminate.
inline constexpr double kDegenerateB2 = 1e-8;

/// Coordinate vectors e_i and (e_i + e_j)/sqrt(2): n(n+1)/2 directions.
std::vector<std::vector<double>> spread_directions(int n);

/// Least-squares tau in b_{i|j} ~ tau M_ij, generic over the scalar so that
/// its gradient can be taken.
template <class T>
T fitted_tau_t(const MetricField& alpha, const FormField& beta, std::span<const T> x) {
  const int n = alpha.dim();
  const Mat<T> bij = covariant_derivative_t<T>(beta, alpha, x);
  const Mat<T> a = alpha.components<T>(x);
  const std::vector<T> b = beta.components<T>(x);
  const T b2 = quadratic_form<T>(inverse(a), b, b);
  T num(0.0), den(0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const T m = (1.0 + 2.0 * b2) * a(i, j) - 3.0 * b[i] * b[j];
      num = num + bij(i, j) * m;
      den = den + m * m;
    }
  }
  return num / den;
}

Theorem1Residuals theorem1_residuals(const MetricField& alpha, const FormField& beta, std::span<const double> x,
                                     std::span<const std::vector<double>> y_samples);

/// K = (alpha/F^2) {[lambda + tau^2 (5 + 4b^2)] alpha + (eta - 3 tau^2) beta}, eta from lambda and tau.
double flag_curvature_theorem1(const MetricField& alpha, const FormField& beta, double tau, double lambda,
                               std::span<const double> x, std::span<const double> y);

struct DeformedPair {
  MetricField h;      // norm h = (1 - b^2) alpha
  FormField omega;    // omega = sqrt(1 - b^2) beta
};

struct RiemannPair {
  MetricField alpha;  // norm alpha = (1 + w^2) h
  FormField beta;     // beta = sqrt(1 + w^2) omega
};

/// Lazy fields; evaluating them where b^2 >= 1 throws deformation_domain_violated.
DeformedPair deform(const MetricField& alpha, const FormField& beta);
RiemannPair undeform(const MetricField& h, const FormField& omega);

/// Parameters (mu, k, a) of the scalar-flag-curvature family over the
/// constant-curvature chart h_mu.
struct FamilyParams {
  double mu = 0.0;
  double k = 0.0;
  std::vector<double> a;

  int dim() const { return static_cast<int>(a.size()); }
  void validate() const;
  /// Chart radius of h_mu: 0.99/sqrt(-mu) for mu < 0, else 1.
  double chart_radius() const;

  double sigma2(std::span<const double> x) const;
  /// c = (-k + mu<a,x>) / (2 sqrt(1 + mu|x|^2)).
  double c(std::span<const double> x) const;
  /// w^2 = |omega|_h^2.
  double w2(std::span<const double> x) const;
  /// rho^2 = (k^2 + (1 + |a|^2) mu) / 4.
  double rho2() const;
  /// |grad c|^2 + mu c^2, constant on the chart: mu (k^2 + mu|a|^2) / 4.
  double conformal_invariant() const;
  /// delta = sqrt(|grad c|^2 + mu c^2); requires mu > 0.
  double delta() const;

  /// tau as printed, (1 + mu|x|^2)(k - mu<a,x>) / sigma^6.
  double tau_printed(std::span<const double> x) const;
  /// tau = -2c (1 - b^2)^(3/2) = (1 + mu|x|^2)(k - mu<a,x>) / sigma^3.
  double tau_chain(std::span<const double> x) const;
  /// u as printed: -(1 + mu|x|^2)^2 / sigma^6 {...}.
  double u_printed(std::span<const double> x) const;
  /// u = -3 tau^2 - mu (1 - b^2)^2 with the chain-rule tau.
  double u_chain(std::span<const double> x) const;
};

/// alpha = sigma^2/(1 + mu|x|^2) h_mu, beta = sigma/(1 + mu|x|^2) [<a,y> + (k - mu<a,x>)/(1 + mu|x|^2) <x,y>].
SquareMetricModel model_family(const FamilyParams& p, Guards guards = {});

/// For mu > 0: alpha = 4/mu (rho^2 - c^2) h_mu, beta = 4 mu^(-3/2) sqrt(rho^2 - c^2) c_i y^i.
SquareMetricModel model_family_alternate(const FamilyParams& p, Guards guards = {});

/// K = (k^2 + mu + mu|a|^2)(1 + mu|x|^2)^3 / sigma^6 * alpha^3/(alpha + beta)^3.
double curvature_formula_th2(const FamilyParams& p, std::span<const double> x, double alpha, double beta);

/// For mu > 0: K = rho^2 mu^3 / 16 [(1 + beta/alpha)(rho^2 - c^2)]^(-3).
double curvature_formula_rigidity(const FamilyParams& p, std::span<const double> x, double alpha, double beta);

/// The zero-flag-curvature pair on the unit ball:
///   alpha = (1 + <a,x>)^2/(1 - |x|^2) * sqrt((1 - |x|^2)|y|^2 + <x,y>^2)/(1 - |x|^2)
///   beta  = +-(1 + <a,x>)^2/(1 - |x|^2) * (<a,y>/(1 + <a,x>) + <x,y>/(1 - |x|^2)).
SquareMetricModel constant_curvature_family(std::vector<double> a, int sign, Guards guards = {});

/// The same metric written as a member of the general family: F = scale * F_family
/// with mu = -1, k = sign/sqrt(1 - |a|^2), a_family = sign a/sqrt(1 - |a|^2), scale = 1 - |a|^2.
struct FamilyEquivalent {
  FamilyParams params;
  double scale = 1.0;
};
FamilyEquivalent constant_curvature_equivalent(const std::vector<double>& a, int sign);

struct CurvatureBounds {
  double K_min = 0.0;
  double K_max = 0.0;
};

CurvatureBounds rigidity_bounds(double mu, double delta);

enum class RigidityCase { riemannian, flat_parallel, positive_family, local_only };

const char* to_string(RigidityCase c);

/// Compact-manifold case split from the fitted curvature mu of h and the
/// largest |c| over the samples.
RigidityCase rigidity_case(double mu_hat, double max_abs_c, double tol);

}  // namespace sqfinsler
