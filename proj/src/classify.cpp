#include "sqfinsler/classify.hpp"

#include <algorithm>
#include <cmath>

namespace sqfinsler {

namespace {

template <class T>
T dot_const(const std::vector<double>& a, std::span<const T> x) {
  T acc(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * x[i];
  return acc;
}

template <class T>
T norm2(std::span<const T> x) {
  T acc(0.0);
  for (const auto& v : x) acc = acc + v * v;
  return acc;
}

double sq(double v) { return v * v; }

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

}  // namespace

double Theorem1Residuals::max_residual() const {
  return std::max({residual_y1, residual_y2, residual_y3, residual_qq_eta, residual_qq_u});
}

std::vector<std::vector<double>> spread_directions(int n) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    out.push_back(e);
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[i] = r;
      e[j] = r;
      out.push_back(e);
    }
  }
  return out;
}

Theorem1Residuals theorem1_residuals(const MetricField& alpha, const FormField& beta, std::span<const double> x,
                                     std::span<const std::vector<double>> y_samples) {
  const int n = alpha.dim();
  require(n >= 3, "theorem-1 residuals need n >= 3");
  require(y_samples.size() >= static_cast<std::size_t>(n * (n + 1) / 2), "need at least n(n+1)/2 directions");

  Theorem1Residuals out;
  const auto& layout = JetLayout::get(n, 1);
  std::vector<Jet1> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet1::variable(layout, i, x[i]));
  const Jet1 tau = fitted_tau_t<Jet1>(alpha, beta, xs);
  out.tau = tau.base();
  out.grad_tau.resize(n);
  for (int i = 0; i < n; ++i) out.grad_tau[i] = tau.derivative({i});

  const Mat<double> a = alpha.components<double>(x);
  const Mat<double> ainv = inverse(a);
  const std::vector<double> b = beta.at(x);
  const std::vector<double> b_up = mat_vec<double>(ainv, b);
  out.b2 = dot<double>(b_up, b);
  const double b2 = out.b2;

  const Tensor bij = covariant_derivative(beta, alpha, x);
  Tensor fit(n, {Variance::lower, Variance::lower});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) fit({i, j}) = out.tau * ((1.0 + 2.0 * b2) * a(i, j) - 3.0 * b[i] * b[j]);
  }
  out.residual_y1 = (bij - fit).norm() / std::max({bij.norm(), fit.norm(), 1.0});

  // (lambda, eta) from the normal equations over all directions.
  std::vector<Tensor> R, P, Q;
  double pp = 0, pq = 0, qq = 0, rp = 0, rq = 0;
  for (const auto& y : y_samples) {
    Tensor r = riemann_curvature_alpha(alpha, x, y);
    const std::vector<double> yl = mat_vec<double>(a, y);
    const double al2 = dot<double>(yl, y);
    const double be = dot<double>(b, y);
    Tensor p(n, {Variance::upper, Variance::lower});
    Tensor q(n, {Variance::upper, Variance::lower});
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const double d = i == k ? 1.0 : 0.0;
        p({i, k}) = al2 * d - y[i] * yl[k];
        q({i, k}) = 2.0 * (be * be * d + al2 * b_up[i] * b[k] - be * b_up[i] * yl[k] - be * b[k] * y[i]);
      }
    }
    for (std::size_t e = 0; e < r.entries().size(); ++e) {
      const double rv = r.entries()[e], pv = p.entries()[e], qv = q.entries()[e];
      pp += pv * pv;
      pq += pv * qv;
      qq += qv * qv;
      rp += rv * pv;
      rq += rv * qv;
    }
    R.push_back(std::move(r));
    P.push_back(std::move(p));
    Q.push_back(std::move(q));
  }
  const double det = pp * qq - pq * pq;
  const double eta_qq = 4.0 * (2.0 + b2) * sq(out.tau);
  if (b2 < kDegenerateB2 || !(det > 1e-12 * pp * qq)) {
    out.eta_indeterminate = true;
    out.lambda = pp > 0.0 ? rp / pp : 0.0;
    out.eta = out.lambda + eta_qq;
  } else {
    out.lambda = (rp * qq - rq * pq) / det;
    out.eta = (pp * rq - pq * rp) / det;
  }
  for (std::size_t s = 0; s < R.size(); ++s) {
    const Tensor model = out.lambda * P[s] + out.eta * Q[s];
    out.residual_y2 = std::max(out.residual_y2, (R[s] - model).norm() / std::max({R[s].norm(), model.norm(), 1.0}));
  }
  if (!out.eta_indeterminate) out.residual_qq_eta = rel(out.eta, out.lambda + eta_qq);

  const double grad_norm = norm(out.grad_tau);
  if (b2 < kDegenerateB2) {
    out.u_indeterminate = true;
    out.residual_y3 = grad_norm;
  } else {
    out.u = dot<double>(out.grad_tau, b_up) / b2;
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = out.grad_tau[i] - out.u * b[i];
    out.residual_y3 = norm(diff) / std::max({grad_norm, std::abs(out.u) * norm(b), 1.0});
    out.residual_qq_u = rel(out.u, -(7.0 + 4.0 * b2) * sq(out.tau) - out.lambda);
  }
  return out;
}

double flag_curvature_theorem1(const MetricField& alpha, const FormField& beta, double tau, double lambda,
                               std::span<const double> x, std::span<const double> y) {
  const Mat<double> a = alpha.components<double>(x);
  const std::vector<double> b = beta.at(x);
  const double b2 = quadratic_form<double>(inverse(a), b, b);
  const double al = std::sqrt(quadratic_form<double>(a, y, y));
  require(al > 0.0, "direction must be nonzero");
  const double be = dot<double>(b, y);
  const double eta = lambda + 4.0 * (2.0 + b2) * tau * tau;
  const double F2 = std::pow(al + be, 4) / (al * al);
  return al / F2 * ((lambda + tau * tau * (5.0 + 4.0 * b2)) * al + (eta - 3.0 * tau * tau) * be);
}

DeformedPair deform(const MetricField& alpha, const FormField& beta) {
  require(alpha.dim() == beta.dim(), "alpha and beta dimensions differ");
  const int n = alpha.dim();
  auto one_minus_b2 = [alpha, beta]<class T>(std::span<const T> x, Mat<T>& a, std::vector<T>& b) {
    a = alpha.components<T>(x);
    b = beta.components<T>(x);
    const T b2 = quadratic_form<T>(inverse(a), b, b);
    if (!(value_of(b2) < 1.0)) throw Error(ErrorKind::deformation_domain_violated, "b^2 >= 1, deformation undefined");
    return T(1.0) - b2;
  };
  DeformedPair out;
  out.h = MetricField::make(n, MetricFamily::custom, "deformed(" + alpha.label() + ")",
                            [one_minus_b2]<class T>(std::span<const T> x) {
                              Mat<T> a;
                              std::vector<T> b;
                              const T f = one_minus_b2(x, a, b);
                              const T f2 = f * f;
                              for (auto& v : a.a) v = v * f2;
                              return a.a;
                            });
  out.omega = FormField::make(n, "deformed(" + beta.label() + ")", [one_minus_b2]<class T>(std::span<const T> x) {
    Mat<T> a;
    std::vector<T> b;
    const T f = sqrt(one_minus_b2(x, a, b));
    for (auto& v : b) v = v * f;
    return b;
  });
  return out;
}

RiemannPair undeform(const MetricField& h, const FormField& omega) {
  require(h.dim() == omega.dim(), "h and omega dimensions differ");
  const int n = h.dim();
  auto one_plus_w2 = [h, omega]<class T>(std::span<const T> x, Mat<T>& m, std::vector<T>& w) {
    m = h.components<T>(x);
    w = omega.components<T>(x);
    const T w2 = quadratic_form<T>(inverse(m), w, w);
    if (!std::isfinite(value_of(w2))) throw Error(ErrorKind::singular_evaluation, "|omega|_h is not finite");
    return T(1.0) + w2;
  };
  RiemannPair out;
  out.alpha = MetricField::make(n, MetricFamily::custom, "undeformed(" + h.label() + ")",
                                [one_plus_w2]<class T>(std::span<const T> x) {
                                  Mat<T> m;
                                  std::vector<T> w;
                                  const T f = one_plus_w2(x, m, w);
                                  const T f2 = f * f;
                                  for (auto& v : m.a) v = v * f2;
                                  return m.a;
                                });
  out.beta = FormField::make(n, "undeformed(" + omega.label() + ")", [one_plus_w2]<class T>(std::span<const T> x) {
    Mat<T> m;
    std::vector<T> w;
    const T f = sqrt(one_plus_w2(x, m, w));
    for (auto& v : w) v = v * f;
    return w;
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
T sigma2_t(const FamilyParams& p, std::span<const T> x) {
  const double a2 = norm2<double>(p.a);
  const T r2 = norm2<T>(x);
  const T ax = dot_const<T>(p.a, x);
  return (p.k * p.k + (1.0 + a2) * p.mu) * r2 + (2.0 * p.k - p.mu * ax) * ax + (a2 + 1.0);
}

template <class T>
T c_t(const FamilyParams& p, std::span<const T> x) {
  const T q = 1.0 + p.mu * norm2<T>(x);
  return (-p.k + p.mu * dot_const<T>(p.a, x)) / (2.0 * sqrt(q));
}

void check_chart(double q, double sigma2) {
  if (!(q > 0.0)) throw Error(ErrorKind::outside_chart, "1 + mu|x|^2 <= 0");
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::outside_chart, "sigma^2 <= 0");
}

}  // namespace

void FamilyParams::validate() const {
  require(dim() >= 2, "family needs n >= 2");
  require(std::isfinite(mu) && std::isfinite(k), "family parameters must be finite");
  for (double v : a) require(std::isfinite(v), "family parameters must be finite");
}

double FamilyParams::chart_radius() const { return SpaceFormParams::standard(mu).r_max; }

double FamilyParams::sigma2(std::span<const double> x) const { return sigma2_t<double>(*this, x); }

double FamilyParams::c(std::span<const double> x) const { return c_t<double>(*this, x); }

double FamilyParams::w2(std::span<const double> x) const {
  const double q = 1.0 + mu * norm2<double>(x);
  const double ax = dot_const<double>(a, x);
  return norm2<double>(a) + (k * k * norm2<double>(x) + 2.0 * k * ax - mu * ax * ax) / q;
}

double FamilyParams::rho2() const { return (k * k + (1.0 + norm2<double>(a)) * mu) / 4.0; }

double FamilyParams::conformal_invariant() const { return mu * (k * k + mu * norm2<double>(a)) / 4.0; }

double FamilyParams::delta() const {
  require(mu > 0.0, "delta is defined for mu > 0");
  return std::sqrt(std::max(conformal_invariant(), 0.0));
}

double FamilyParams::tau_printed(std::span<const double> x) const {
  const double q = 1.0 + mu * norm2<double>(x);
  return q * (k - mu * dot_const<double>(a, x)) / std::pow(sigma2(x), 3);
}

double FamilyParams::tau_chain(std::span<const double> x) const {
  const double q = 1.0 + mu * norm2<double>(x);
  return q * (k - mu * dot_const<double>(a, x)) / std::pow(sigma2(x), 1.5);
}

double FamilyParams::u_printed(std::span<const double> x) const {
  const double q = 1.0 + mu * norm2<double>(x);
  const double a2 = norm2<double>(a);
  const double ax = dot_const<double>(a, x);
  const double brace = ((1.0 + a2) * mu * mu + k * k * mu) * norm2<double>(x) + 2.0 * mu * mu * ax * ax +
                       (1.0 + a2 - 4.0 * k * ax) * mu + 3.0 * k * k;
  return -q * q / std::pow(sigma2(x), 3) * brace;
}

double FamilyParams::u_chain(std::span<const double> x) const {
  const double q = 1.0 + mu * norm2<double>(x);
  const double one_minus_b2 = q / sigma2(x);
  return -3.0 * sq(tau_chain(x)) - mu * sq(one_minus_b2);
}

SquareMetricModel model_family(const FamilyParams& p, Guards guards) {
  p.validate();
  const int n = p.dim();
  const MetricField h = space_form(p.mu, n);
  MetricField alpha = MetricField::make(n, MetricFamily::custom, "square-scalar-alpha",
                                        [p, h]<class T>(std::span<const T> x) {
                                          const T q = 1.0 + p.mu * norm2<T>(x);
                                          const T s2 = sigma2_t<T>(p, x);
                                          check_chart(value_of(q), value_of(s2));
                                          const T f = s2 / q;
                                          const T f2 = f * f;
                                          Mat<T> m = h.components<T>(x);
                                          for (auto& v : m.a) v = v * f2;
                                          return m.a;
                                        });
  FormField beta = FormField::make(n, "square-scalar-beta", [p]<class T>(std::span<const T> x) {
    const T q = 1.0 + p.mu * norm2<T>(x);
    const T s2 = sigma2_t<T>(p, x);
    check_chart(value_of(q), value_of(s2));
    const T lead = sqrt(s2) / q;
    const T coef = (p.k - p.mu * dot_const<T>(p.a, x)) / q;
    std::vector<T> b;
    for (std::size_t i = 0; i < x.size(); ++i) b.push_back(lead * (p.a[i] + coef * x[i]));
    return b;
  });
  return SquareMetricModel(std::move(alpha), std::move(beta), guards);
}

SquareMetricModel model_family_alternate(const FamilyParams& p, Guards guards) {
  p.validate();
  require(p.mu > 0.0, "the alternate representation needs mu > 0");
  const int n = p.dim();
  const MetricField h = space_form(p.mu, n);
  const double rho2 = p.rho2();
  auto gap = [p, rho2]<class T>(std::span<const T> x) {
    const T c = c_t<T>(p, x);
    const T g = rho2 - c * c;
    if (!(value_of(g) > 0.0)) throw Error(ErrorKind::outside_chart, "rho^2 - c^2 <= 0");
    return g;
  };
  MetricField alpha = MetricField::make(n, MetricFamily::custom, "square-scalar-alpha-alt",
                                        [p, h, gap]<class T>(std::span<const T> x) {
                                          const T f = (4.0 / p.mu) * gap(x);
                                          const T f2 = f * f;
                                          Mat<T> m = h.components<T>(x);
                                          for (auto& v : m.a) v = v * f2;
                                          return m.a;
                                        });
  FormField beta = FormField::make(n, "square-scalar-beta-alt", [p, gap]<class T>(std::span<const T> x) {
    // c_i by differentiating c once more on jets.
    const auto& layout = JetLayout::get(static_cast<int>(x.size()), 1);
    std::vector<Jet<T>> xs;
    for (std::size_t i = 0; i < x.size(); ++i) xs.push_back(Jet<T>::variable(layout, static_cast<int>(i), x[i]));
    const Jet<T> c = c_t<Jet<T>>(p, xs);
    const T lead = 4.0 * std::pow(p.mu, -1.5) * sqrt(gap(x));
    std::vector<T> b;
    for (std::size_t i = 0; i < x.size(); ++i) b.push_back(lead * c.derivative({static_cast<int>(i)}));
    return b;
  });
  return SquareMetricModel(std::move(alpha), std::move(beta), guards);
}

double curvature_formula_th2(const FamilyParams& p, std::span<const double> x, double alpha, double beta) {
  const double q = 1.0 + p.mu * norm2<double>(x);
  const double a2 = norm2<double>(p.a);
  return (p.k * p.k + p.mu + p.mu * a2) * std::pow(q, 3) / std::pow(p.sigma2(x), 3) *
         std::pow(alpha / (alpha + beta), 3);
}

double curvature_formula_rigidity(const FamilyParams& p, std::span<const double> x, double alpha, double beta) {
  require(p.mu > 0.0, "the rigidity curvature formula needs mu > 0");
  const double rho2 = p.rho2();
  const double c = p.c(x);
  return rho2 * std::pow(p.mu, 3) / 16.0 * std::pow((1.0 + beta / alpha) * (rho2 - c * c), -3);
}

SquareMetricModel constant_curvature_family(std::vector<double> a, int sign, Guards guards) {
  require(sign == 1 || sign == -1, "sign must be +1 or -1");
  const int n = static_cast<int>(a.size());
  require(n >= 2, "constant-curvature family needs n >= 2");
  auto factors = [a]<class T>(std::span<const T> x, T& one_minus_r2, T& one_plus_ax) {
    one_minus_r2 = 1.0 - norm2<T>(x);
    one_plus_ax = 1.0 + dot_const<T>(a, x);
    if (!(value_of(one_minus_r2) > 0.0)) throw Error(ErrorKind::outside_chart, "|x| >= 1");
    if (!(value_of(one_plus_ax) > 0.0)) throw Error(ErrorKind::outside_chart, "1 + <a,x> <= 0");
  };
  MetricField alpha = MetricField::make(n, MetricFamily::custom, "square-constant-alpha",
                                        [factors, n]<class T>(std::span<const T> x) {
                                          T d, e;
                                          factors(x, d, e);
                                          const T f = e * e / d;
                                          const T scale = f * f / (d * d);
                                          std::vector<T> m(static_cast<std::size_t>(n) * n);
                                          for (int i = 0; i < n; ++i) {
                                            for (int j = 0; j < n; ++j) {
                                              T v = x[i] * x[j];
                                              if (i == j) v = v + d;
                                              m[i * n + j] = v * scale;
                                            }
                                          }
                                          return m;
                                        });
  FormField beta = FormField::make(n, "square-constant-beta", [factors, a, sign]<class T>(std::span<const T> x) {
    T d, e;
    factors(x, d, e);
    const T f = static_cast<double>(sign) * e * e / d;
    std::vector<T> b;
    for (std::size_t i = 0; i < x.size(); ++i) b.push_back(f * (a[i] / e + x[i] / d));
    return b;
  });
  return SquareMetricModel(std::move(alpha), std::move(beta), guards);
}

FamilyEquivalent constant_curvature_equivalent(const std::vector<double>& a, int sign) {
  require(sign == 1 || sign == -1, "sign must be +1 or -1");
  const double a2 = norm2<double>(a);
  require(a2 < 1.0, "the family form needs |a| < 1");
  const double kf = 1.0 / std::sqrt(1.0 - a2);
  FamilyEquivalent out;
  out.params.mu = -1.0;
  out.params.k = sign * kf;
  for (double v : a) out.params.a.push_back(sign * kf * v);
  out.scale = 1.0 - a2;
  return out;
}

CurvatureBounds rigidity_bounds(double mu, double delta) {
  require(mu > 0.0, "rigidity bounds need mu > 0");
  require(delta >= 0.0, "delta must be nonnegative");
  const double root = std::sqrt(4.0 * delta * delta + mu * mu);
  return {std::pow(root - 2.0 * delta, 3) / (mu * root), std::pow(root + 2.0 * delta, 3) / (mu * root)};
}

const char* to_string(RigidityCase c) {
  switch (c) {
    case RigidityCase::riemannian: return "riemannian";
    case RigidityCase::flat_parallel: return "flat-parallel";
    case RigidityCase::positive_family: return "positive-family";
    case RigidityCase::local_only: return "local-only";
  }
  return "unknown";
}

RigidityCase rigidity_case(double mu_hat, double max_abs_c, double tol) {
  if (mu_hat > tol) return RigidityCase::positive_family;
  if (max_abs_c > tol) return RigidityCase::local_only;
  return mu_hat < -tol ? RigidityCase::riemannian : RigidityCase::flat_parallel;
}

}  // namespace sqfinsler
