#pragma once

#include <stdexcept>
#include <string>

namespace sqfinsler {

enum class ErrorKind {
  contract_violation,
  singular_evaluation,
  stencil_failure,
  degenerate_metric,
  degenerate_fundamental_tensor,
  outside_chart,
  outside_regular_cone,
  deformation_domain_violated,
  family_inadmissible,
  io_failure,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::contract_violation, what);
}

}  // namespace sqfinsler
