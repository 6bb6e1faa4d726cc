#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "sqfinsler/betaform.hpp"
#include "test_util.hpp"

using namespace sqfinsler;

namespace {

double ip(const std::vector<double>& u, const std::vector<double>& v) {
  return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

// c(x) = (-k + mu<a,x>) / (2 sqrt(1 + mu|x|^2))
double expected_c(double mu, double k, const std::vector<double>& a, const std::vector<double>& x) {
  return (-k + mu * ip(a, x)) / (2.0 * std::sqrt(1.0 + mu * ip(x, x)));
}

}  // namespace

TEST_CASE("covariant derivative of simple forms") {
  const std::vector<double> x{0.4, -0.7};
  CHECK(covariant_derivative(constant_form({0.3, 0.1}), euclidean_metric(2), x).norm() == 0.0);

  Polynomial x2;
  x2.terms = {{1.0, {0, 1}}};
  const FormField beta = polynomial_form(2, {x2, Polynomial{}});
  const Tensor b = covariant_derivative(beta, euclidean_metric(2), x);
  CHECK(b({0, 1}) == 1.0);
  CHECK(b({0, 0}) == 0.0);
  CHECK(b({1, 0}) == 0.0);
  CHECK(b({1, 1}) == 0.0);
}

TEST_CASE("r/s decomposition") {
  std::mt19937_64 rng(3);
  Polynomial p1, p2, p3;
  p1.terms = {{0.2, {0, 1, 0}}, {0.1, {1, 0, 2}}};
  p2.terms = {{-0.3, {1, 0, 0}}, {0.05, {0, 2, 1}}};
  p3.terms = {{0.1, {0, 0, 0}}, {0.4, {1, 1, 0}}};
  const FormField beta = polynomial_form(3, {p1, p2, p3});
  Polynomial phi;
  phi.terms = {{0.2, {1, 0, 0}}, {-0.1, {0, 1, 1}}};
  const MetricField g = conformal_poly_metric(3, phi);

  const auto x = testutil::random_ball(rng, 3, 0.6);
  const auto y = testutil::random_unit(rng, 3);
  const Tensor bij = covariant_derivative(beta, g, x);
  const NablaBeta nb = rs_decompose(bij, g, beta, x, y);

  CHECK((nb.r + nb.s - bij).norm() <= 1e-15 * std::max(bij.norm(), 1.0));
  double r00 = 0.0, s0 = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(nb.r({i, j}) == nb.r({j, i}));
      CHECK(nb.s({i, j}) == -nb.s({j, i}));
      r00 += bij({i, j}) * y[i] * y[j];
      s0 += nb.b_up[i] * nb.s({i, j}) * y[j];
    }
  }
  CHECK(nb.r00 == doctest::Approx(r00).epsilon(1e-13));
  CHECK(nb.s0 == doctest::Approx(s0).epsilon(1e-13));
  CHECK(nb.b2 == doctest::Approx(norm_squared(beta, g, x)).epsilon(1e-14));

  const Tensor sym = symmetrize(bij);
  const NablaBeta closed = rs_decompose(sym, g, beta, x, y);
  CHECK(closed.s.norm() == 0.0);
  CHECK(closed.t.norm() == 0.0);
  CHECK(closed.q.norm() == 0.0);
  CHECK(closed.s0 == 0.0);
  CHECK(norm(closed.s_up0) == 0.0);
  CHECK(norm(closed.t_j) == 0.0);
  CHECK(norm(closed.q_j) == 0.0);
}

TEST_CASE("conformal form values") {
  const std::vector<double> a{0.1, -0.2, 0.3};
  const FormField w = conformal_form(0.7, 1.3, a);
  CHECK(testutil::max_abs_diff(w.at(std::vector<double>(3, 0.0)), a) == 0.0);
  CHECK(norm(conformal_form(1.0, 0.0, {0.0, 0.0, 0.0}).at(std::vector<double>{0.2, 0.1, 0.3})) == 0.0);

  std::mt19937_64 rng(21);
  for (double mu : {-1.0, 0.0, 0.7}) {
    const FormField om = conformal_form(mu, 1.3, a);
    const MetricField h = space_form(mu, 3);
    for (int s = 0; s < 8; ++s) {
      const auto x = testutil::random_ball(rng, 3, 0.4 * SpaceFormParams::standard(mu).r_max);
      const double q = 1.0 + mu * ip(x, x);
      const double ax = ip(a, x);
      const double expected = ip(a, a) + (1.3 * 1.3 * ip(x, x) + 2.0 * 1.3 * ax - mu * ax * ax) / q;
      CHECK(norm_squared(om, h, x) == doctest::Approx(expected).epsilon(1e-10));

      // upper-index form sqrt(1 + mu|x|^2)(k x^i + a^i) equals h^ij w_j
      const Tensor hinv = h.inverse_at(x);
      const auto wl = om.at(x);
      for (int i = 0; i < 3; ++i) {
        double up = 0.0;
        for (int j = 0; j < 3; ++j) up += hinv({i, j}) * wl[j];
        CHECK(up == doctest::Approx(std::sqrt(q) * (1.3 * x[i] + a[i])).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(conformal_form(-1.0, 1.0, {0.0, 0.0}).at(std::vector<double>{1.0, 0.2}), Error);
}

TEST_CASE("closed conformal check on the space-form family") {
  std::mt19937_64 rng(23);
  const std::vector<double> a{0.1, 0.2, 0.05};
  for (double mu : {-1.0, 0.0, 1.0, 2.0}) {
    const double k = 0.3;
    const FormField om = conformal_form(mu, k, a);
    const MetricField h = space_form(mu, 3);
    std::vector<std::vector<double>> xs;
    for (int s = 0; s < 16; ++s) xs.push_back(testutil::random_ball(rng, 3, 0.4 * SpaceFormParams::standard(mu).r_max));
    const ClosedConformalCheck chk = check_closed_conformal(om, h, xs);
    CHECK(chk.residual < 1e-8);
    CHECK(chk.closedness < 1e-9);
    std::vector<double> f;
    for (std::size_t s = 0; s < xs.size(); ++s) {
      CHECK(chk.c[s] == doctest::Approx(expected_c(mu, k, a, xs[s])).epsilon(1e-8).scale(1.0));
      const ConformalScalarData d = conformal_scalar_data(om, h, mu, xs[s]);
      CHECK(d.c == doctest::Approx(chk.c[s]).epsilon(1e-12));
      CHECK(d.hessian_residual < 1e-7);
      CHECK(d.laplacian_residual < 1e-7);
      f.push_back(d.invariant);
    }
    // |grad c|^2 + mu c^2 = mu(k^2 + mu|a|^2)/4 everywhere
    const double f_expected = mu * (k * k + mu * ip(a, a)) / 4.0;
    for (double v : f) CHECK(std::abs(v - f_expected) <= 1e-8 * std::max(std::abs(f_expected), 1e-3));
  }

  const ClosedConformalCheck flat =
      check_closed_conformal(constant_form({0.1, 0.2, 0.3}), euclidean_metric(3), std::vector<std::vector<double>>{{0.1, 0.2, 0.3}});
  CHECK(flat.c[0] == 0.0);
  CHECK(flat.residual < 1e-12);
}

TEST_CASE("gradient identity on the positive-curvature family") {
  const double mu = 1.5, k = 0.4;
  const std::vector<double> a{0.2, -0.1, 0.3};
  const FormField om = conformal_form(mu, k, a);
  const MetricField h = space_form(mu, 3);
  const double rho2 = (k * k + mu + mu * ip(a, a)) / 4.0;
  std::mt19937_64 rng(29);
  for (int s = 0; s < 8; ++s) {
    const auto x = testutil::random_ball(rng, 3, 0.4);
    const ConformalScalarData d = conformal_scalar_data(om, h, mu, x);
    const double rhs = mu * (4.0 * rho2 - 4.0 * d.c * d.c - mu) / 4.0;
    CHECK(d.grad_norm2 == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("non-conformal form is caught") {
  Polynomial p1;
  p1.terms = {{1.0, {0, 1, 0}}};
  const FormField beta = polynomial_form(3, {p1, Polynomial{}, Polynomial{}});
  const ClosedConformalCheck chk =
      check_closed_conformal(beta, euclidean_metric(3), std::vector<std::vector<double>>{{0.1, 0.2, 0.3}});
  CHECK(chk.residual > 1e-3);
  CHECK(chk.closedness > 1e-3);
}
