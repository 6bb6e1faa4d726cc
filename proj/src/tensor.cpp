#include "sqfinsler/tensor.hpp"

#include <numeric>

namespace sqfinsler {

namespace {

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

Tensor::Tensor(int dim, std::vector<Variance> variance)
    : dim_(dim), variance_(std::move(variance)), entries_(ipow(dim, static_cast<int>(variance_.size())), 0.0) {
  require(dim >= 1, "tensor dimension must be positive");
  require(variance_.size() <= 4, "tensor rank must be at most 4");
}

Tensor::Tensor(int dim, std::vector<Variance> variance, std::vector<double> entries)
    : Tensor(dim, std::move(variance)) {
  require(entries.size() == entries_.size(), "tensor entry count must equal dim^rank");
  entries_ = std::move(entries);
}

std::size_t Tensor::offset(std::span<const int> idx) const {
  require(static_cast<int>(idx.size()) == rank(), "tensor index arity");
  std::size_t off = 0;
  for (int i : idx) {
    require(i >= 0 && i < dim_, "tensor index out of range");
    off = off * dim_ + static_cast<std::size_t>(i);
  }
  return off;
}

double Tensor::norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

Tensor Tensor::contract_slot(int slot, const Tensor& m, Variance result) const {
  require(slot >= 0 && slot < rank(), "slot out of range");
  require(m.rank() == 2 && m.dim() == dim_, "metric must be rank 2 of matching dimension");
  auto var = variance_;
  var[slot] = result;
  Tensor out(dim_, var);
  std::vector<int> idx(rank(), 0);
  std::vector<int> src(rank(), 0);
  const std::size_t count = entries_.size();
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rem = flat;
    for (int s = rank() - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % dim_);
      rem /= dim_;
    }
    double acc = 0.0;
    src = idx;
    for (int k = 0; k < dim_; ++k) {
      src[slot] = k;
      acc += m({idx[slot], k}) * at(src);
    }
    out.entries_[flat] = acc;
  }
  return out;
}

Tensor Tensor::raise(int slot, const Tensor& inverse_metric) const {
  require(variance_.at(slot) == Variance::lower, "can only raise a lower index");
  return contract_slot(slot, inverse_metric, Variance::upper);
}

Tensor Tensor::lower(int slot, const Tensor& metric) const {
  require(variance_.at(slot) == Variance::upper, "can only lower an upper index");
  return contract_slot(slot, metric, Variance::lower);
}

Tensor& Tensor::operator+=(const Tensor& o) {
  require(o.dim_ == dim_ && o.variance_ == variance_, "tensor shape mismatch in +");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  require(o.dim_ == dim_ && o.variance_ == variance_, "tensor shape mismatch in -");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : entries_) v *= s;
  return *this;
}

namespace {

Tensor split_part(const Tensor& t, double sign) {
  require(t.rank() == 2, "symmetrize/antisymmetrize require a rank-2 tensor");
  Tensor out(t.dim(), t.variance());
  for (int i = 0; i < t.dim(); ++i) {
    for (int j = 0; j < t.dim(); ++j) out({i, j}) = 0.5 * (t({i, j}) + sign * t({j, i}));
  }
  return out;
}

}  // namespace

Tensor symmetrize(const Tensor& t) { return split_part(t, 1.0); }
Tensor antisymmetrize(const Tensor& t) { return split_part(t, -1.0); }

bool is_positive_definite(const Mat<double>& m) {
  const int n = m.n;
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) return false;
    l[j * n + j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / l[j * n + j];
    }
  }
  return true;
}

Tensor to_tensor(const Mat<double>& m, Variance first, Variance second) {
  return Tensor(m.n, {first, second}, m.a);
}

Mat<double> to_mat(const Tensor& t) {
  require(t.rank() == 2, "to_mat requires rank 2");
  return Mat<double>(t.dim(), std::vector<double>(t.entries().begin(), t.entries().end()));
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace sqfinsler
