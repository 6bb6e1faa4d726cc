#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sqfinsler/fd.hpp"
#include "sqfinsler/jet.hpp"
#include "sqfinsler/tensor.hpp"
#include "random_expr.hpp"

using namespace sqfinsler;
using testutil::Expr;
using testutil::grow;

namespace {

std::vector<std::vector<double>> unit_directions(int m) {
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) d[i][i] = 1.0;
  return d;
}

}  // namespace

TEST_CASE("jet_eval reproduces elementary derivatives") {
  SUBCASE("t^2 at 3") {
    const std::vector<double> x0{3.0};
    auto j = jet_eval([](std::span<const Jet1> x) { return x[0] * x[0]; }, x0, unit_directions(1), 2);
    CHECK(j.base() == doctest::Approx(9.0));
    CHECK(j.derivative({0}) == doctest::Approx(6.0));
    CHECK(j.derivative({0, 0}) == doctest::Approx(2.0));
  }
  SUBCASE("sqrt(t) at 4") {
    const std::vector<double> x0{4.0};
    auto j = jet_eval([](std::span<const Jet1> x) { return sqrt(x[0]); }, x0, unit_directions(1), 1);
    CHECK(j.base() == doctest::Approx(2.0));
    CHECK(j.derivative({0}) == doctest::Approx(0.25));
  }
  SUBCASE("u*v mixed partial") {
    const std::vector<double> x0{2.0, 5.0};
    auto j = jet_eval([](std::span<const Jet1> x) { return x[0] * x[1]; }, x0, unit_directions(2), 2);
    CHECK(j.derivative({0, 1}) == doctest::Approx(1.0));
    CHECK(j.derivative({0, 0}) == doctest::Approx(0.0));
  }
}

TEST_CASE("jet_eval contract and singular errors") {
  const std::vector<double> x0{0.0};
  CHECK_THROWS_AS(jet_eval([](std::span<const Jet1> x) { return x[0]; }, x0, unit_directions(1), 4), Error);
  try {
    jet_eval([](std::span<const Jet1> x) { return 1.0 / x[0]; }, x0, unit_directions(1), 1);
    FAIL("expected singular evaluation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_evaluation);
    CHECK(std::string(e.what()).find("divide") != std::string::npos);
  }
  const std::vector<double> xneg{-1.0};
  try {
    jet_eval([](std::span<const Jet1> x) { return sqrt(x[0]); }, xneg, unit_directions(1), 1);
    FAIL("expected singular evaluation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_evaluation);
    CHECK(std::string(e.what()).find("sqrt") != std::string::npos);
  }
  // more directions than 2 * inputs
  CHECK_THROWS_AS(jet_eval([](std::span<const Jet1> x) { return x[0]; }, x0,
                           std::vector<std::vector<double>>(3, std::vector<double>{1.0}), 1),
                  Error);
}

TEST_CASE("jet with zero perturbation behaves as a real") {
  const Jet1 a(2.5), b(-0.75);
  CHECK(value_of(a * b) == doctest::Approx(2.5 * -0.75));
  CHECK(value_of(sqrt(a)) == doctest::Approx(std::sqrt(2.5)));
  CHECK(value_of(a / b) == doctest::Approx(2.5 / -0.75));
  CHECK(value_of(pow(a, 1.5)) == doctest::Approx(std::pow(2.5, 1.5)));
  CHECK((a * b).is_constant());
}

TEST_CASE("jets are exact on cubic polynomials") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng), c4 = u(rng);
    const std::vector<double> x0{u(rng), u(rng)};
    auto f = [&](std::span<const Jet1> x) { return c0 + c1 * x[0] * x[1] + c2 * x[0] * x[0] * x[0] + c3 * x[1] * x[1] + c4 * x[0] * x[1] * x[1]; };
    auto j = jet_eval(f, x0, unit_directions(2), 3);
    const double s = x0[0], t = x0[1];
    auto close = [](double got, double want) { return std::abs(got - want) <= 1e-13 * std::max(1.0, std::abs(want)); };
    CHECK(close(j.derivative({0}), c1 * t + 3 * c2 * s * s + c4 * t * t));
    CHECK(close(j.derivative({1}), c1 * s + 2 * c3 * t + 2 * c4 * s * t));
    CHECK(close(j.derivative({0, 0}), 6 * c2 * s));
    CHECK(close(j.derivative({0, 1}), c1 + 2 * c4 * t));
    CHECK(close(j.derivative({1, 1}), 2 * c3 + 2 * c4 * s));
    CHECK(close(j.derivative({0, 0, 0}), 6 * c2));
    CHECK(close(j.derivative({0, 1, 1}), 2 * c4));
    CHECK(close(j.derivative({1, 1, 1}), 0.0));
  }
}

TEST_CASE("mixed partials are symmetric") {
  const std::vector<double> x0{0.3, -0.4, 0.8};
  auto j = jet_eval(
      [](std::span<const Jet1> x) { return sqrt(1.0 + x[0] * x[0] * x[1]) / (2.0 + x[2] * x[1]) + exp(x[0] * x[2]); },
      x0, unit_directions(3), 3);
  const std::vector<int> e01{1, 1, 0};
  CHECK(j.derivative({0, 1}) == j.derivative({1, 0}));
  CHECK(j.derivative({0, 1, 2}) == j.derivative({2, 1, 0}));
  CHECK(j.derivative(std::span<const int>(e01)) == j.derivative({1, 0}));
}

TEST_CASE("nested jets take derivatives of derivatives") {
  // f(t) = t^5: the inner level carries d/dt, the outer level three more.
  const auto& outer = JetLayout::get(1, 3);
  const auto& inner = JetLayout::get(1, 2);
  const double t0 = 1.3;
  const Jet2 t = Jet2::variable(inner, 0, Jet1::variable(outer, 0, t0));
  const Jet2 f = t * t * t * t * t;
  const Jet1 second = f.derivative({0, 0});  // 20 t^3 as a jet in the outer variable
  CHECK(second.base() == doctest::Approx(20 * std::pow(t0, 3)));
  CHECK(second.derivative({0, 0, 0}) == doctest::Approx(120.0));
  CHECK(second.derivative({0}) == doctest::Approx(60 * t0 * t0));
}

TEST_CASE("partial lowers the order and differentiates") {
  const std::vector<double> x0{0.7, 0.2};
  auto j = jet_eval([](std::span<const Jet1> x) { return x[0] * x[0] * x[0] * x[1]; }, x0, unit_directions(2), 3);
  const Jet1 dx = j.partial(0);
  CHECK(dx.order() == 2);
  CHECK(dx.base() == doctest::Approx(3 * 0.49 * 0.2));
  CHECK(dx.derivative({0, 1}) == doctest::Approx(6 * 0.7));
  CHECK(dx.partial(1).partial(0).base() == doctest::Approx(6 * 0.7));
}

TEST_CASE("fd_partial oracle examples") {
  const std::vector<double> two{2.0}, zero{0.0}, one{1.0};
  const std::vector<int> o1{1}, o2{2}, o3{3};
  CHECK(std::abs(fd_partial([](std::span<const double> x) { return x[0] * x[0] * x[0]; }, two, o3, 2.0) - 6.0) < 1e-5);
  CHECK(std::abs(fd_partial([](std::span<const double> x) { return std::sin(x[0]); }, zero, o1) - 1.0) < 1e-9);
  CHECK(std::abs(fd_partial([](std::span<const double> x) { return std::exp(x[0]); }, one, o2) - std::exp(1.0)) < 1e-6);
  CHECK_THROWS_AS(fd_partial([](std::span<const double>) { return NAN; }, one, o1), Error);
  try {
    fd_partial([](std::span<const double> x) { return std::log(x[0]); }, zero, o1);
    FAIL("expected stencil failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::stencil_failure);
  }
}

TEST_CASE("jet and finite differences agree on random composites") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 2;
    Expr e;
    e.root_node = grow(e, rng, m, 4);
    std::vector<double> x0(m);
    for (double& v : x0) v = u(rng);
    const Jet1 j = jet_eval([&](std::span<const Jet1> x) { return e(x); }, x0, unit_directions(m), 3);
    ScalarFunction f = [&](std::span<const double> x) { return e(x); };
    for (int order = 1; order <= 3; ++order) {
      std::vector<int> idx(m, 0);
      for (int k = 0; k < order; ++k) ++idx[rng() % m];
      const double want = j.derivative(std::span<const int>(idx));
      const double got = fd_partial(f, x0, idx);
      const double tol = order <= 2 ? 1e-5 : 1e-3;
      INFO("trial " << trial << " order " << order);
      CHECK(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)));
      ++checked;
    }
  }
  CHECK(checked == 600);
}

TEST_CASE("symmetrize and antisymmetrize") {
  const Tensor t(2, {Variance::lower, Variance::lower}, {0, 1, 3, 0});
  const Tensor s = symmetrize(t);
  CHECK(s({0, 1}) == 2.0);
  CHECK(s({1, 0}) == 2.0);
  CHECK(s({0, 0}) == 0.0);

  const Tensor sym(2, {Variance::lower, Variance::lower}, {1, 5, 5, 2});
  CHECK(antisymmetrize(sym).norm() == 0.0);

  const Tensor q(2, {Variance::lower, Variance::lower}, {1, 2, 4, 8});
  const Tensor a = antisymmetrize(q);
  CHECK(a({0, 0}) == 0.0);
  CHECK(a({0, 1}) == -1.0);
  CHECK(a({1, 0}) == 1.0);
  CHECK((symmetrize(q) + a - q).norm() == 0.0);

  const Tensor r3(2, {Variance::lower, Variance::lower, Variance::lower});
  CHECK_THROWS_AS(symmetrize(r3), Error);
}

TEST_CASE("symmetrization is idempotent and raising then lowering is the identity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 4;
    Mat<double> b(n);
    for (auto& v : b.a) v = u(rng);
    Mat<double> g(n);  // b b^T + n I is SPD
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = i == j ? n : 0.0;
        for (int k = 0; k < n; ++k) acc += b(i, k) * b(j, k);
        g(i, j) = acc;
      }
    }
    const Tensor metric = to_tensor(g, Variance::lower, Variance::lower);
    const Tensor inv = to_tensor(inverse(g), Variance::upper, Variance::upper);
    std::vector<double> entries(n * n);
    for (double& v : entries) v = u(rng);
    const Tensor t(n, {Variance::lower, Variance::lower}, entries);
    CHECK((symmetrize(symmetrize(t)) - symmetrize(t)).norm() <= 1e-15);
    CHECK((antisymmetrize(antisymmetrize(t)) - antisymmetrize(t)).norm() <= 1e-15);
    const Tensor back = t.raise(1, inv).lower(1, metric);
    CHECK((back - t).norm() <= 1e-12 * t.norm());
    CHECK(metric.rank() == 2);
    CHECK(back.variance()[1] == Variance::lower);
  }
}

TEST_CASE("tensor shape invariants") {
  const Tensor t(3, {Variance::upper, Variance::lower, Variance::lower, Variance::lower});
  CHECK(t.entries().size() == 81);
  CHECK_THROWS_AS(Tensor(2, {Variance::lower}, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(Tensor(2, std::vector<Variance>(5, Variance::lower)), Error);
}
