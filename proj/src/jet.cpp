#include "sqfinsler/jet.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace sqfinsler {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::contract_violation: return "contract violation";
    case ErrorKind::singular_evaluation: return "singular evaluation";
    case ErrorKind::stencil_failure: return "stencil failure";
    case ErrorKind::degenerate_metric: return "degenerate metric";
    case ErrorKind::degenerate_fundamental_tensor: return "degenerate fundamental tensor";
    case ErrorKind::outside_chart: return "outside chart";
    case ErrorKind::outside_regular_cone: return "outside regular cone";
    case ErrorKind::deformation_domain_violated: return "deformation domain violated";
    case ErrorKind::family_inadmissible: return "family inadmissible with these parameters";
    case ErrorKind::io_failure: return "I/O failure";
  }
  return "error";
}

namespace {

// All exponent vectors of total degree d over n variables, lexicographically
// descending (x0^d first).
void enumerate_degree(int n, int d, std::vector<int>& current, int var, std::vector<std::vector<int>>& out) {
  if (var == n - 1) {
    current[var] = d;
    out.push_back(current);
    return;
  }
  for (int e = d; e >= 0; --e) {
    current[var] = e;
    enumerate_degree(n, d - e, current, var + 1, out);
  }
  current[var] = 0;
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  for (int d = 0; d <= order; ++d) {
    std::vector<int> current(nvars, 0);
    std::vector<std::vector<int>> level;
    if (nvars > 0) enumerate_degree(nvars, d, current, 0, level);
    else if (d == 0) level.push_back({});
    for (auto& e : level) {
      exponents_.push_back(std::move(e));
      degrees_.push_back(d);
    }
    degree_end_.push_back(static_cast<int>(exponents_.size()));
  }
  for (const auto& e : exponents_) {
    double w = 1.0;
    for (int p : e) {
      for (int q = 2; q <= p; ++q) w *= q;
    }
    factorial_weight_.push_back(w);
  }
  products_.resize(exponents_.size());
  std::vector<int> sum(nvars);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      for (int v = 0; v < nvars; ++v) sum[v] = exponents_[i][v] + exponents_[j][v];
      products_[i].push_back({j, index_of(sum)});
    }
  }
  partial_.resize(nvars);
  if (order >= 1) {
    std::vector<int> shifted(nvars);
    for (int v = 0; v < nvars; ++v) {
      for (int t = 0; t < degree_end_[order - 1]; ++t) {
        shifted = exponents_[t];
        ++shifted[v];
        partial_[v].push_back({index_of(shifted), static_cast<double>(shifted[v])});
      }
    }
  }
}

int JetLayout::index_of(std::span<const int> exponents) const {
  if (static_cast<int>(exponents.size()) != nvars_) return -1;
  int d = 0;
  for (int e : exponents) {
    if (e < 0) return -1;
    d += e;
  }
  if (d > order_) return -1;
  const int begin = d == 0 ? 0 : degree_end_[d - 1];
  for (int k = begin; k < degree_end_[d]; ++k) {
    if (std::equal(exponents.begin(), exponents.end(), exponents_[k].begin())) return k;
  }
  return -1;
}

const JetLayout& JetLayout::get(int nvars, int order) {
  require(nvars >= 0, "jet variable count must be non-negative");
  require(order >= 0 && order <= kMaxJetOrder, "jet order must be in 0..3");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot.reset(new JetLayout(nvars, order));
  return *slot;
}

}  // namespace sqfinsler
