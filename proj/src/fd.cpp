#include "sqfinsler/fd.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "sqfinsler/error.hpp"

namespace sqfinsler {

namespace {

// Second-order central stencils: (offset in units of h, weight); divide by h^p.
std::vector<std::pair<int, double>> stencil(int p) {
  switch (p) {
    case 0: return {{0, 1.0}};
    case 1: return {{1, 0.5}, {-1, -0.5}};
    case 2: return {{1, 1.0}, {0, -2.0}, {-1, 1.0}};
    case 3: return {{2, 0.5}, {1, -1.0}, {-1, 1.0}, {-2, -0.5}};
    default: throw Error(ErrorKind::contract_violation, "finite-difference order must be <= 3");
  }
}

double central_difference(const ScalarFunction& f, std::span<const double> x0, std::span<const int> exponents,
                          double h) {
  const std::size_t n = x0.size();
  std::vector<std::vector<std::pair<int, double>>> stencils(n);
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    stencils[i] = stencil(exponents[i]);
    total += exponents[i];
  }
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<std::size_t> cursor(n, 0);
  double sum = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [offset, w] = stencils[i][cursor[i]];
      x[i] = x0[i] + offset * h;
      weight *= w;
    }
    const double value = f(x);
    if (!std::isfinite(value)) throw Error(ErrorKind::stencil_failure, "non-finite function value on stencil");
    sum += weight * value;
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++cursor[i] < stencils[i].size()) break;
      cursor[i] = 0;
    }
    if (i == n) break;
  }
  return sum / std::pow(h, total);
}

}  // namespace

double fd_partial(const ScalarFunction& f, std::span<const double> x0, std::span<const int> exponents, double scale) {
  require(exponents.size() == x0.size(), "multi-index arity must match the point");
  require(scale > 0.0, "finite-difference scale must be positive");
  int order = 0;
  for (int e : exponents) {
    require(e >= 0, "negative multi-index entry");
    order += e;
  }
  require(order >= 1 && order <= 3, "finite-difference total order must be in 1..3");
  const double h = scale * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 2));
  const double fine = central_difference(f, x0, exponents, h);
  const double coarse = central_difference(f, x0, exponents, 2.0 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace sqfinsler
