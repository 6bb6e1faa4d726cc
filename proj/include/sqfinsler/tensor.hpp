#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

#include "sqfinsler/error.hpp"
#include "sqfinsler/jet.hpp"

namespace sqfinsler {

enum class Variance { upper, lower };

/// Dense tensor of rank 0..4 over an n-dimensional space, row-major entries.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> variance);
  Tensor(int dim, std::vector<Variance> variance, std::vector<double> entries);

  int rank() const { return static_cast<int>(variance_.size()); }
  int dim() const { return dim_; }
  const std::vector<Variance>& variance() const { return variance_; }
  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }

  double& operator()(std::initializer_list<int> idx) { return entries_[offset(idx)]; }
  double operator()(std::initializer_list<int> idx) const { return entries_[offset(idx)]; }
  double& at(std::span<const int> idx) { return entries_[offset(idx)]; }
  double at(std::span<const int> idx) const { return entries_[offset(idx)]; }

  /// Frobenius norm of the entries.
  double norm() const;

  /// Contract slot `slot` (which must be lower) with the inverse metric.
  Tensor raise(int slot, const Tensor& inverse_metric) const;
  /// Contract slot `slot` (which must be upper) with the metric.
  Tensor lower(int slot, const Tensor& metric) const;

  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(double s);
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

 private:
  std::size_t offset(std::span<const int> idx) const;
  std::size_t offset(std::initializer_list<int> idx) const {
    return offset(std::span<const int>(idx.begin(), idx.size()));
  }
  Tensor contract_slot(int slot, const Tensor& m, Variance result) const;

  int dim_ = 0;
  std::vector<Variance> variance_;
  std::vector<double> entries_ = {0.0};
};

/// (T + T^t)/2 for a rank-2 tensor.
Tensor symmetrize(const Tensor& t);
/// (T - T^t)/2 for a rank-2 tensor.
Tensor antisymmetrize(const Tensor& t);

// ---------------------------------------------------------------------------
// Small dense row-major matrices over any scalar (double or jets). These back
// the generic geometry code, which must run on nested jet types.

template <class T>
struct Mat {
  int n = 0;
  std::vector<T> a;

  Mat() = default;
  explicit Mat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, T(0.0)) {}
  Mat(int dim, std::vector<T> entries) : n(dim), a(std::move(entries)) {
    require(a.size() == static_cast<std::size_t>(n) * n, "matrix entry count");
  }
  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = T(1.0);
    return m;
  }

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Solve m x = rhs by Gaussian elimination with partial pivoting on the
/// underlying real values. Throws `fail_kind` when the pivot vanishes.
template <class T>
std::vector<T> solve(Mat<T> m, std::vector<T> rhs, ErrorKind fail_kind = ErrorKind::degenerate_metric) {
  const int n = m.n;
  double scale = 0.0;
  for (const auto& v : m.a) scale = std::max(scale, std::abs(value_of(v)));
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(value_of(m(r, col))) > std::abs(value_of(m(pivot, col)))) pivot = r;
    }
    if (!(std::abs(value_of(m(pivot, col))) > 1e-14 * scale)) {
      throw Error(fail_kind, "singular matrix in linear solve");
    }
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(m(col, j), m(pivot, j));
      std::swap(rhs[col], rhs[pivot]);
    }
    const T inv = reciprocal(m(col, col));
    for (int r = col + 1; r < n; ++r) {
      if (is_zero(m(r, col))) continue;
      const T f = m(r, col) * inv;
      for (int j = col; j < n; ++j) m(r, j) = m(r, j) - f * m(col, j);
      rhs[r] = rhs[r] - f * rhs[col];
    }
  }
  std::vector<T> x(n, T(0.0));
  for (int r = n - 1; r >= 0; --r) {
    T acc = rhs[r];
    for (int j = r + 1; j < n; ++j) acc = acc - m(r, j) * x[j];
    x[r] = acc / m(r, r);
  }
  return x;
}

template <class T>
Mat<T> inverse(const Mat<T>& m, ErrorKind fail_kind = ErrorKind::degenerate_metric) {
  const int n = m.n;
  Mat<T> inv(n);
  for (int col = 0; col < n; ++col) {
    std::vector<T> e(n, T(0.0));
    e[col] = T(1.0);
    auto x = solve(m, std::move(e), fail_kind);
    for (int r = 0; r < n; ++r) inv(r, col) = x[r];
  }
  return inv;
}

/// Cholesky-style positive-definiteness test on real values.
bool is_positive_definite(const Mat<double>& m);

template <class T>
std::vector<T> mat_vec(const Mat<T>& m, std::span<const T> v) {
  std::vector<T> r(m.n, T(0.0));
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) r[i] = r[i] + m(i, j) * v[j];
  }
  return r;
}

template <class T>
T quadratic_form(const Mat<T>& m, std::span<const T> u, std::span<const T> v) {
  T acc(0.0);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) acc = acc + m(i, j) * u[i] * v[j];
  }
  return acc;
}

template <class T>
T dot(std::span<const T> u, std::span<const T> v) {
  T acc(0.0);
  for (std::size_t i = 0; i < u.size(); ++i) acc = acc + u[i] * v[i];
  return acc;
}

/// Real parts of a matrix of jets.
template <class T>
Mat<double> values(const Mat<T>& m) {
  Mat<double> r(m.n);
  for (std::size_t k = 0; k < m.a.size(); ++k) r.a[k] = value_of(m.a[k]);
  return r;
}

Tensor to_tensor(const Mat<double>& m, Variance first, Variance second);
Mat<double> to_mat(const Tensor& t);

/// Euclidean norm of a plain vector.
double norm(std::span<const double> v);

}  // namespace sqfinsler
