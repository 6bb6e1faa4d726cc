#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sqfinsler {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Finite-difference estimate of the mixed partial d^|p| f / dx^p at x0,
/// where p = `exponents` (one entry per input, total order 1..3).
///
/// Tensor-product central differences with step h = scale * eps^(1/(|p|+2)),
/// followed by one Richardson step between h and 2h. Independent of the jet
/// engine; used only as an oracle.
double fd_partial(const ScalarFunction& f, std::span<const double> x0, std::span<const int> exponents,
                  double scale = 1.0);

}  // namespace sqfinsler
