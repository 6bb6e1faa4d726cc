#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sqfinsler/riemann.hpp"
#include "test_util.hpp"

using namespace sqfinsler;

namespace {

Polynomial wobbly_phi() {
  // phi = 0.3 x1 - 0.2 x2 x3 + 0.1 x1^2 x2 + 0.05 x3^4
  Polynomial p;
  p.terms = {{0.3, {1, 0, 0}}, {-0.2, {0, 1, 1}}, {0.1, {2, 1, 0}}, {0.05, {0, 0, 4}}};
  return p;
}

}  // namespace

TEST_CASE("christoffel symbols of flat and space-form metrics vanish where expected") {
  const std::vector<double> x{0.3, -0.2, 0.1};
  CHECK(christoffel(euclidean_metric(3), x).norm() == 0.0);
  const std::vector<double> origin(3, 0.0);
  CHECK(christoffel(space_form(1.0, 3), origin).norm() < 1e-15);
}

TEST_CASE("christoffel symbols of exp(2 x1) delta") {
  Polynomial phi;
  phi.terms = {{1.0, {1, 0}}};
  const Tensor g = christoffel(conformal_poly_metric(2, phi), std::vector<double>{0.0, 0.0});
  CHECK(g({0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g({0, 1, 1}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(g({1, 0, 1}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g({1, 1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g({0, 0, 1})) < 1e-15);
  CHECK(std::abs(g({1, 0, 0})) < 1e-15);
  CHECK(std::abs(g({1, 1, 1})) < 1e-15);
}

TEST_CASE("christoffel symbols are symmetric and metric compatible") {
  const MetricField g = conformal_poly_metric(3, wobbly_phi());
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testutil::random_ball(rng, 3, 0.8);
    const Tensor gamma = christoffel(g, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(gamma({i, j, k}) == gamma({i, k, j}));

    // a_{ij|k} = d_k a_ij - Gamma^l_ki a_lj - Gamma^l_kj a_il
    const auto& layout = JetLayout::get(3, 1);
    std::vector<Jet1> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(Jet1::variable(layout, i, x[i]));
    const Mat<Jet1> a = g.components<Jet1>(xs);
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          double v = a(i, j).derivative({k});
          scale = std::max(scale, std::abs(v));
          for (int l = 0; l < 3; ++l) v -= gamma({l, k, i}) * a(l, j).base() + gamma({l, k, j}) * a(i, l).base();
          worst = std::max(worst, std::abs(v));
        }
      }
    }
    CHECK(worst <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("space form components") {
  const std::vector<double> origin(3, 0.0);
  for (double mu : {-1.0, 0.5, 2.0}) {
    const Tensor a = space_form(mu, 3).at(origin);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a({i, j}) == (i == j ? 1.0 : 0.0));
  }
  std::mt19937_64 rng(5);
  const auto x = testutil::random_ball(rng, 3, 0.9);
  CHECK((space_form(0.0, 3).at(x) - euclidean_metric(3).at(x)).norm() == 0.0);

  const Mat<double> a = space_form(1.0, 3).components<double>(std::vector<double>{1.0, 0.0, 0.0});
  const std::vector<double> y{0.0, 1.0, 0.0};
  CHECK(std::sqrt(quadratic_form<double>(a, y, y)) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));

  CHECK_THROWS_AS(space_form(-1.0, 2).at(std::vector<double>{1.0, 0.5}), Error);
  try {
    space_form(-1.0, 2).at(std::vector<double>{1.0, 0.5});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::outside_chart);
  }
}

TEST_CASE("space form chart parameters") {
  CHECK(SpaceFormParams::standard(-4.0).r_max == doctest::Approx(0.495));
  CHECK(SpaceFormParams::standard(1.0).r_max == 1.0);
  SpaceFormParams bad{-1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("riemannian spray is quadratic and vanishes on flat space") {
  std::mt19937_64 rng(7);
  const MetricField g = space_form(-0.7, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testutil::random_ball(rng, 3, 0.5);
    const auto y = testutil::random_unit(rng, 3);
    const auto G1 = spray_riemann(g, x, y);
    const auto G2 = spray_riemann(g, x, testutil::scaled(y, 2.0));
    CHECK(testutil::max_abs_diff(testutil::scaled(G1, 4.0), G2) <= 1e-12 * std::max(norm(G2), 1.0));
    const auto G0 = spray_riemann(euclidean_metric(3), x, y);
    CHECK(norm(G0) == 0.0);
  }
  CHECK_THROWS_AS(spray_riemann(g, std::vector<double>(3, 0.1), std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("riemann curvature of space forms") {
  std::mt19937_64 rng(13);
  for (double mu : {-1.0, -0.3, 0.0, 0.5, 1.0, 2.0}) {
    const MetricField g = space_form(mu, 3);
    const double r = 0.4 * SpaceFormParams::standard(mu).r_max;
    std::vector<PointDirection> samples;
    for (int s = 0; s < 10; ++s) {
      samples.push_back({testutil::random_ball(rng, 3, r), testutil::random_unit(rng, 3)});
    }
    for (const auto& s : samples) {
      const Tensor R = riemann_curvature_alpha(g, s.x, s.y);
      const Tensor expected = constant_curvature_tensor(g, mu, s.x, s.y);
      CHECK((R - expected).norm() <= 1e-8 * std::max(R.norm(), 1.0));
      // y is a null direction
      for (int i = 0; i < 3; ++i) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += R({i, k}) * s.y[k];
        CHECK(std::abs(v) <= 1e-9 * std::max(R.norm(), 1.0));
      }
      const Tensor R3 = riemann_curvature_alpha(g, s.x, testutil::scaled(s.y, 3.0));
      CHECK((R3 - 9.0 * R).norm() <= 1e-10 * std::max(R3.norm(), 1.0));
    }
    const SectionalFit fit = sectional_constancy_residual(g, samples);
    CHECK(fit.mu == doctest::Approx(mu).epsilon(1e-7).scale(1.0));
    CHECK(fit.residual < 1e-7);
  }
}

TEST_CASE("sectional constancy fails on a non-constant-curvature metric") {
  std::mt19937_64 rng(17);
  const MetricField g = conformal_poly_metric(3, wobbly_phi());
  std::vector<PointDirection> samples;
  for (int s = 0; s < 10; ++s) samples.push_back({testutil::random_ball(rng, 3, 0.6), testutil::random_unit(rng, 3)});
  CHECK(sectional_constancy_residual(g, samples).residual > 1e-3);

  const SectionalFit flat = sectional_constancy_residual(euclidean_metric(3), samples);
  CHECK(flat.mu == 0.0);
  CHECK(flat.residual < 1e-10);
  CHECK_THROWS_AS(sectional_constancy_residual(g, std::span<const PointDirection>{}), Error);
}
