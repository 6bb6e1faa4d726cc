#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet<T> carries the Taylor coefficients of a function of a fixed set of
// perturbation variables t_0..t_{m-1}, truncated at total order <= 3.
// Coefficients are stored in graded monomial order, so the layout of order q
// is a prefix of the layout of order p > q. Coefficients may themselves be
// jets, which is how derivatives of derivatives are taken without ever
// exceeding order 3 at a single level.

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sqfinsler/error.hpp"

namespace sqfinsler {

inline constexpr int kMaxJetOrder = 3;

class JetLayout {
 public:
  struct Term {
    int rhs;
    int out;
  };
  struct Shift {
    int source;
    double factor;
  };

  /// Shared, immutable layout for `nvars` perturbation variables truncated at
  /// total order `order` (0..3). Thread-safe; layouts live for the program.
  static const JetLayout& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  int size_at_order(int q) const { return degree_end_[q]; }
  int degree(int monomial) const { return degrees_[monomial]; }
  const std::vector<int>& exponents(int monomial) const { return exponents_[monomial]; }
  double factorial_weight(int monomial) const { return factorial_weight_[monomial]; }

  // -1 when the monomial is not representable at this order.
  int index_of(std::span<const int> exponents) const;

  std::span<const Term> products_with(int lhs) const { return products_[lhs]; }

  // Entry t maps monomial t of the order-1 layout to (index of t + e_var, factor).
  std::span<const Shift> partial_map(int var) const { return partial_[var]; }

 private:
  JetLayout(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<int> degree_end_;
  std::vector<double> factorial_weight_;
  std::vector<std::vector<Term>> products_;
  std::vector<std::vector<Shift>> partial_;
};

template <class T>
class Jet;

template <class T>
struct is_jet : std::false_type {};
template <class T>
struct is_jet<Jet<T>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

inline double value_of(double v) { return v; }
template <class T>
double value_of(const Jet<T>& j) {
  return value_of(j.base());
}

inline bool is_zero(double v) { return v == 0.0; }
template <class T>
bool is_zero(const Jet<T>& j) {
  return j.is_constant() && is_zero(j.base());
}

inline void fma_into(double& acc, double a, double b) { acc += a * b; }
template <class T>
void fma_into(Jet<T>& acc, const Jet<T>& a, const Jet<T>& b);

namespace detail {

inline const JetLayout* common_layout(const JetLayout* a, const JetLayout* b) {
  if (a == nullptr) return b;
  if (b == nullptr || a == b) return a;
  if (a->nvars() != b->nvars()) {
    throw Error(ErrorKind::contract_violation, "jets over different variable sets combined");
  }
  return a->order() <= b->order() ? a : b;
}

}  // namespace detail

template <class T>
class Jet {
 public:
  using scalar_type = T;

  Jet() : c_(1, T(0.0)) {}
  Jet(const T& v) : c_(1, v) {}  // NOLINT(google-explicit-constructor)
  template <class S>
    requires(std::is_arithmetic_v<S> && !std::is_same_v<T, double>)
  Jet(S v) : c_(1, T(static_cast<double>(v))) {}  // NOLINT(google-explicit-constructor)

  /// The perturbation variable `var` of `layout`, centred at `base`.
  static Jet variable(const JetLayout& layout, int var, const T& base) {
    Jet j;
    j.layout_ = &layout;
    j.c_.assign(layout.size(), T(0.0));
    j.c_[0] = base;
    if (layout.order() >= 1) j.c_[1 + var] = T(1.0);
    return j;
  }

  static Jet from_coefficients(const JetLayout* layout, std::vector<T> coefficients) {
    Jet j;
    j.layout_ = layout;
    j.c_ = std::move(coefficients);
    require(j.c_.size() == static_cast<std::size_t>(layout ? layout->size() : 1),
            "coefficient count does not match jet layout");
    return j;
  }

  bool is_constant() const { return layout_ == nullptr; }
  const JetLayout* layout() const { return layout_; }
  int order() const { return layout_ ? layout_->order() : kMaxJetOrder; }

  const T& base() const { return c_[0]; }
  const std::vector<T>& coefficients() const { return c_; }

  /// Mixed partial derivative d^|p| f / dt^p for the exponent vector p.
  T derivative(std::span<const int> exponents) const {
    int total = 0;
    for (int e : exponents) total += e;
    if (total == 0) return c_[0];
    if (is_constant()) return T(0.0);
    require(static_cast<int>(exponents.size()) == layout_->nvars(), "derivative exponent arity");
    require(total <= layout_->order(), "derivative order exceeds jet order");
    const int k = layout_->index_of(exponents);
    return c_[k] * layout_->factorial_weight(k);
  }

  /// Derivative along the listed variables, e.g. {0, 2} is d^2/dt0 dt2.
  T derivative(std::initializer_list<int> vars) const {
    if (is_constant()) return vars.size() == 0 ? c_[0] : T(0.0);
    std::vector<int> e(layout_->nvars(), 0);
    for (int v : vars) ++e.at(v);
    return derivative(std::span<const int>(e));
  }

  /// d/dt_var as a jet of one lower order.
  Jet partial(int var) const {
    if (is_constant()) return Jet(0.0);
    require(layout_->order() >= 1, "partial of an order-0 jet");
    const JetLayout& lower = JetLayout::get(layout_->nvars(), layout_->order() - 1);
    std::vector<T> c(lower.size(), T(0.0));
    auto shifts = layout_->partial_map(var);
    for (int t = 0; t < lower.size(); ++t) {
      c[t] = c_[shifts[t].source] * shifts[t].factor;
    }
    return from_coefficients(&lower, std::move(c));
  }

  /// Same function viewed at a lower truncation order.
  Jet truncated(int order) const {
    if (is_constant() || order >= layout_->order()) return *this;
    const JetLayout& lower = JetLayout::get(layout_->nvars(), order);
    return from_coefficients(&lower, std::vector<T>(c_.begin(), c_.begin() + lower.size()));
  }

  Jet scaled(const T& s) const {
    Jet r = *this;
    for (auto& c : r.c_) c = c * s;
    return r;
  }

  Jet& operator+=(const Jet& o) {
    adopt(detail::common_layout(layout_, o.layout_));
    const std::size_t m = std::min(c_.size(), o.c_.size());
    for (std::size_t k = 0; k < m; ++k) c_[k] = c_[k] + o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    adopt(detail::common_layout(layout_, o.layout_));
    const std::size_t m = std::min(c_.size(), o.c_.size());
    for (std::size_t k = 0; k < m; ++k) c_[k] = c_[k] - o.c_[k];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) { return a.scaled(T(-1.0)); }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    fma_into(r, a, b);
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator+(Jet a, S s) {
    a.c_[0] = a.c_[0] + T(static_cast<double>(s));
    return a;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator+(S s, Jet a) {
    return std::move(a) + s;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator-(Jet a, S s) {
    a.c_[0] = a.c_[0] - T(static_cast<double>(s));
    return a;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator-(S s, const Jet& a) {
    return (-a) + s;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator*(const Jet& a, S s) {
    Jet r = a;
    for (auto& c : r.c_) c = c * static_cast<double>(s);
    return r;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator*(S s, const Jet& a) {
    return a * s;
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator/(const Jet& a, S s) {
    return a * (1.0 / static_cast<double>(s));
  }
  template <class S>
    requires std::is_arithmetic_v<S>
  friend Jet operator/(S s, const Jet& a) {
    return reciprocal(a) * s;
  }

 private:
  template <class U>
  friend void fma_into(Jet<U>& acc, const Jet<U>& a, const Jet<U>& b);
  template <class U>
  friend Jet<U> compose(const Jet<U>& u, const std::array<U, kMaxJetOrder + 1>& taylor);

  // Re-express this jet on `layout` (which must be compatible); widens a
  // constant or truncates a higher-order jet.
  void adopt(const JetLayout* layout) {
    if (layout == layout_ || layout == nullptr) return;
    if (layout_ == nullptr) {
      T b = std::move(c_[0]);
      c_.assign(layout->size(), T(0.0));
      c_[0] = std::move(b);
    } else {
      c_.resize(layout->size());
    }
    layout_ = layout;
  }

  const JetLayout* layout_ = nullptr;
  std::vector<T> c_;
};

template <class T>
void fma_into(Jet<T>& acc, const Jet<T>& a, const Jet<T>& b) {
  if (a.is_constant() && b.is_constant()) {
    fma_into(acc.c_[0], a.c_[0], b.c_[0]);
    return;
  }
  const JetLayout* layout = detail::common_layout(detail::common_layout(a.layout_, b.layout_), acc.layout_);
  acc.adopt(layout);
  const int size = layout->size();
  if (a.is_constant()) {
    if (is_zero(a.c_[0])) return;
    for (int k = 0; k < size; ++k) fma_into(acc.c_[k], a.c_[0], b.c_[k]);
    return;
  }
  if (b.is_constant()) {
    if (is_zero(b.c_[0])) return;
    for (int k = 0; k < size; ++k) fma_into(acc.c_[k], a.c_[k], b.c_[0]);
    return;
  }
  for (int i = 0; i < size; ++i) {
    if (is_zero(a.c_[i])) continue;
    for (const auto& term : layout->products_with(i)) {
      if (is_zero(b.c_[term.rhs])) continue;
      fma_into(acc.c_[term.out], a.c_[i], b.c_[term.rhs]);
    }
  }
}

/// f(u) from the scaled Taylor coefficients f(u0), f'(u0), f''(u0)/2, f'''(u0)/6.
template <class T>
Jet<T> compose(const Jet<T>& u, const std::array<T, kMaxJetOrder + 1>& taylor) {
  if (u.is_constant()) return Jet<T>(taylor[0]);
  Jet<T> d = u;
  d.c_[0] = T(0.0);
  Jet<T> result = d.scaled(taylor[1]);
  result.c_[0] = taylor[0];
  Jet<T> power = d;
  for (int k = 2; k <= u.order(); ++k) {
    power = power * d;
    result += power.scaled(taylor[k]);
  }
  return result;
}

// Scalar overloads so generic code can call these unqualified for every
// scalar type, double included.
inline double sqrt(double v) { return std::sqrt(v); }
inline double exp(double v) { return std::exp(v); }
inline double log(double v) { return std::log(v); }
inline double sin(double v) { return std::sin(v); }
inline double cos(double v) { return std::cos(v); }
inline double pow(double v, double p) { return std::pow(v, p); }
inline double reciprocal(double v) { return 1.0 / v; }

template <class T>
Jet<T> reciprocal(const Jet<T>& u) {
  const T& u0 = u.base();
  if (value_of(u0) == 0.0) {
    throw Error(ErrorKind::singular_evaluation, "division by zero in primitive 'divide'");
  }
  if (u.is_constant()) return Jet<T>(reciprocal(u0));
  const T r = reciprocal(u0);
  const T r2 = r * r;
  return compose(u, {r, -1.0 * r2, r2 * r, -1.0 * (r2 * r2)});
}

template <class T>
Jet<T> sqrt(const Jet<T>& u) {
  const T& u0 = u.base();
  const double v = value_of(u0);
  if (v < 0.0) throw Error(ErrorKind::singular_evaluation, "negative argument to primitive 'sqrt'");
  if (u.is_constant()) return Jet<T>(sqrt(u0));
  if (v == 0.0) throw Error(ErrorKind::singular_evaluation, "primitive 'sqrt' not differentiable at 0");
  const T s = sqrt(u0);
  const T inv = reciprocal(u0);
  const T s_inv = s * inv;
  return compose(u, {s, 0.5 * s_inv, -0.125 * (s_inv * inv), 0.0625 * (s_inv * inv * inv)});
}

template <class T>
Jet<T> exp(const Jet<T>& u) {
  const T e = exp(u.base());
  if (u.is_constant()) return Jet<T>(e);
  return compose(u, {e, e, 0.5 * e, e * (1.0 / 6.0)});
}

template <class T>
Jet<T> log(const Jet<T>& u) {
  const T& u0 = u.base();
  if (value_of(u0) <= 0.0) throw Error(ErrorKind::singular_evaluation, "non-positive argument to primitive 'log'");
  if (u.is_constant()) return Jet<T>(log(u0));
  const T r = reciprocal(u0);
  const T r2 = r * r;
  return compose(u, {log(u0), r, -0.5 * r2, (1.0 / 3.0) * (r2 * r)});
}

template <class T>
Jet<T> sin(const Jet<T>& u) {
  const T s = sin(u.base());
  if (u.is_constant()) return Jet<T>(s);
  const T c = cos(u.base());
  return compose(u, {s, c, -0.5 * s, (-1.0 / 6.0) * c});
}

template <class T>
Jet<T> cos(const Jet<T>& u) {
  const T c = cos(u.base());
  if (u.is_constant()) return Jet<T>(c);
  const T s = sin(u.base());
  return compose(u, {c, -1.0 * s, -0.5 * c, (1.0 / 6.0) * s});
}

template <class T>
Jet<T> pow(const Jet<T>& u, double p) {
  const T& u0 = u.base();
  const double v = value_of(u0);
  if (v < 0.0 && p != std::floor(p)) {
    throw Error(ErrorKind::singular_evaluation, "negative base with fractional exponent in primitive 'pow'");
  }
  if (u.is_constant()) return Jet<T>(pow(u0, p));
  if (v == 0.0) throw Error(ErrorKind::singular_evaluation, "primitive 'pow' expanded at 0");
  const T up = pow(u0, p);
  const T r = reciprocal(u0);
  const T d1 = up * r;
  const T d2 = d1 * r;
  const T d3 = d2 * r;
  return compose(u, {up, p * d1, (p * (p - 1.0) / 2.0) * d2, (p * (p - 1.0) * (p - 2.0) / 6.0) * d3});
}

using Jet1 = Jet<double>;
using Jet2 = Jet<Jet1>;
using Jet3 = Jet<Jet2>;

/// Taylor expansion of f at x0 along the given perturbation directions:
/// f(x0 + sum_d t_d * directions[d]) as a jet in t, truncated at `order`.
template <class F>
Jet1 jet_eval(F&& f, std::span<const double> x0, const std::vector<std::vector<double>>& directions, int order) {
  require(order >= 1 && order <= kMaxJetOrder, "jet order must be in 1..3");
  require(!directions.empty(), "at least one perturbation direction is required");
  require(directions.size() <= 2 * x0.size(), "too many simultaneous perturbation directions");
  const auto& layout = JetLayout::get(static_cast<int>(directions.size()), order);
  std::vector<Jet1> args;
  args.reserve(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    std::vector<double> c(layout.size(), 0.0);
    c[0] = x0[i];
    for (std::size_t d = 0; d < directions.size(); ++d) {
      require(directions[d].size() == x0.size(), "direction dimension mismatch");
      c[1 + d] = directions[d][i];
    }
    args.push_back(Jet1::from_coefficients(&layout, std::move(c)));
  }
  return f(std::span<const Jet1>(args));
}

}  // namespace sqfinsler
