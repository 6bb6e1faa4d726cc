#pragma once

// Type-erased Riemannian metrics a_ij(x) and 1-forms b_i(x).
//
// A field is built from one generic callable and instantiated for every
// scalar the curvature code needs: plain doubles and jets nested up to three
// levels deep (Riemann, Weyl and Douglas tensors each peel off one level).

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sqfinsler/jet.hpp"
#include "sqfinsler/tensor.hpp"

namespace sqfinsler {

template <class T>
using VectorFn = std::function<std::vector<T>(std::span<const T>)>;

class FieldEvaluator {
 public:
  FieldEvaluator() = default;

  /// `fn(std::span<const T> x) -> std::vector<T>` must compile for every
  /// supported scalar T.
  template <class Fn>
  explicit FieldEvaluator(Fn fn)
      : fns_(std::make_shared<Table>(Table{VectorFn<double>(fn), VectorFn<Jet1>(fn), VectorFn<Jet2>(fn),
                                           VectorFn<Jet3>(fn)})) {}

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const {
    return std::get<VectorFn<T>>(*fns_)(x);
  }

  explicit operator bool() const { return fns_ != nullptr; }

 private:
  using Table = std::tuple<VectorFn<double>, VectorFn<Jet1>, VectorFn<Jet2>, VectorFn<Jet3>>;
  std::shared_ptr<const Table> fns_;
};

enum class MetricFamily { euclidean, space_form, conformal_poly, custom };

const char* to_string(MetricFamily family);

class MetricField {
 public:
  MetricField() = default;

  /// `fn(x)` returns the n*n row-major entries of a_ij(x).
  template <class Fn>
  static MetricField make(int dim, MetricFamily family, std::string label, Fn fn) {
    MetricField g;
    g.dim_ = dim;
    g.family_ = family;
    g.label_ = std::move(label);
    g.eval_ = FieldEvaluator(std::move(fn));
    return g;
  }

  int dim() const { return dim_; }
  MetricFamily family() const { return family_; }
  const std::string& label() const { return label_; }

  template <class T>
  Mat<T> components(std::span<const T> x) const {
    require(static_cast<int>(x.size()) == dim_, "metric evaluated at a point of wrong dimension");
    return Mat<T>(dim_, eval_(x));
  }

  /// a_ij at x as a (lower, lower) tensor.
  Tensor at(std::span<const double> x) const;
  /// a^ij at x as an (upper, upper) tensor.
  Tensor inverse_at(std::span<const double> x) const;
  /// a_ij(x) symmetric positive definite (Cholesky test).
  bool positive_definite_at(std::span<const double> x) const;

 private:
  int dim_ = 0;
  MetricFamily family_ = MetricFamily::custom;
  std::string label_;
  FieldEvaluator eval_;
};

class FormField {
 public:
  FormField() = default;

  /// `fn(x)` returns the n components b_i(x).
  template <class Fn>
  static FormField make(int dim, std::string label, Fn fn) {
    FormField b;
    b.dim_ = dim;
    b.label_ = std::move(label);
    b.eval_ = FieldEvaluator(std::move(fn));
    return b;
  }

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }

  template <class T>
  std::vector<T> components(std::span<const T> x) const {
    require(static_cast<int>(x.size()) == dim_, "form evaluated at a point of wrong dimension");
    return eval_(x);
  }

  std::vector<double> at(std::span<const double> x) const { return components<double>(x); }

 private:
  int dim_ = 0;
  std::string label_;
  FieldEvaluator eval_;
};

/// Sparse polynomial in n variables, total degree <= 4.
struct Polynomial {
  struct Term {
    double coefficient = 0.0;
    std::vector<int> powers;
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  int degree() const;
  bool operator==(const Polynomial&) const = default;
  void validate(int dim, int max_degree = 4) const;

  template <class T>
  T operator()(std::span<const T> x) const {
    T acc(0.0);
    for (const auto& term : terms) {
      T monomial(term.coefficient);
      for (std::size_t v = 0; v < term.powers.size(); ++v) {
        for (int p = 0; p < term.powers[v]; ++p) monomial = monomial * x[v];
      }
      acc = acc + monomial;
    }
    return acc;
  }
};

MetricField euclidean_metric(int dim);

/// a_ij = exp(2 phi(x)) delta_ij.
MetricField conformal_poly_metric(int dim, Polynomial phi);

/// Constant components b_i.
FormField constant_form(std::vector<double> b);

/// b_i(x) given by one polynomial per component.
FormField polynomial_form(int dim, std::vector<Polynomial> components);

FormField zero_form(int dim);

/// Same form with component `index` multiplied by `factor`.
FormField perturbed_form(const FormField& b, int index, double factor);

}  // namespace sqfinsler
