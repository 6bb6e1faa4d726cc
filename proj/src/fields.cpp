#include "sqfinsler/fields.hpp"

namespace sqfinsler {

const char* to_string(MetricFamily family) {
  switch (family) {
    case MetricFamily::euclidean: return "euclidean";
    case MetricFamily::space_form: return "space-form";
    case MetricFamily::conformal_poly: return "conformal-poly";
    case MetricFamily::custom: return "custom";
  }
  return "custom";
}

Tensor MetricField::at(std::span<const double> x) const {
  return to_tensor(components<double>(x), Variance::lower, Variance::lower);
}

Tensor MetricField::inverse_at(std::span<const double> x) const {
  return to_tensor(inverse(components<double>(x)), Variance::upper, Variance::upper);
}

bool MetricField::positive_definite_at(std::span<const double> x) const {
  const auto m = components<double>(x);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * (std::abs(m(i, j)) + 1.0)) return false;
    }
  }
  return is_positive_definite(m);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (int p : t.powers) s += p;
    d = std::max(d, s);
  }
  return d;
}

void Polynomial::validate(int dim, int max_degree) const {
  for (const auto& t : terms) {
    require(static_cast<int>(t.powers.size()) == dim, "polynomial term arity must equal the dimension");
    for (int p : t.powers) require(p >= 0, "polynomial powers must be non-negative");
  }
  require(degree() <= max_degree, "polynomial total degree exceeds " + std::to_string(max_degree));
}

MetricField euclidean_metric(int dim) {
  return MetricField::make(dim, MetricFamily::euclidean, "euclidean", [dim]<class T>(std::span<const T>) {
    std::vector<T> a(static_cast<std::size_t>(dim) * dim, T(0.0));
    for (int i = 0; i < dim; ++i) a[i * dim + i] = T(1.0);
    return a;
  });
}

MetricField conformal_poly_metric(int dim, Polynomial phi) {
  phi.validate(dim);
  return MetricField::make(dim, MetricFamily::conformal_poly, "conformal-poly",
                           [dim, phi = std::move(phi)]<class T>(std::span<const T> x) {
                             const T factor = exp(2.0 * phi(x));
                             std::vector<T> a(static_cast<std::size_t>(dim) * dim, T(0.0));
                             for (int i = 0; i < dim; ++i) a[i * dim + i] = factor;
                             return a;
                           });
}

FormField constant_form(std::vector<double> b) {
  const int dim = static_cast<int>(b.size());
  return FormField::make(dim, "constant", [b = std::move(b)]<class T>(std::span<const T>) {
    std::vector<T> out;
    out.reserve(b.size());
    for (double v : b) out.emplace_back(v);
    return out;
  });
}

FormField polynomial_form(int dim, std::vector<Polynomial> components) {
  require(static_cast<int>(components.size()) == dim, "one polynomial per form component is required");
  for (const auto& p : components) p.validate(dim);
  return FormField::make(dim, "polynomial", [components = std::move(components)]<class T>(std::span<const T> x) {
    std::vector<T> out;
    out.reserve(components.size());
    for (const auto& p : components) out.push_back(p(x));
    return out;
  });
}

FormField zero_form(int dim) { return constant_form(std::vector<double>(dim, 0.0)); }

FormField perturbed_form(const FormField& b, int index, double factor) {
  require(index >= 0 && index < b.dim(), "perturbation index out of range");
  return FormField::make(b.dim(), b.label() + "-perturbed", [b, index, factor]<class T>(std::span<const T> x) {
    auto c = b.components<T>(x);
    c[index] = c[index] * factor;
    return c;
  });
}

}  // namespace sqfinsler
