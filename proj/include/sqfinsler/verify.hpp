#pragma once

// Batch verification: configure a family, sample its chart, run every
// residual check and summarize the outcome in a versioned report.

#include <cstdint>
#include <functional>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqfinsler/classify.hpp"

namespace sqfinsler {

enum class FamilyKind { euclidean_parallel, space_form, square_scalar, square_constant, custom };

const char* to_string(FamilyKind kind);
FamilyKind parse_family(std::string_view name);

enum class ReportFormat { json, text };

ReportFormat parse_format(std::string_view name);

struct Perturbation {
  int index = 0;
  double factor = 1.0;
  bool operator==(const Perturbation&) const = default;
};

/// "index:factor", e.g. "0:1.05".
Perturbation parse_perturbation(std::string_view text);

/// a_ij = exp(2 phi) delta_ij and b_i given by polynomials.
struct CustomFamily {
  Polynomial phi;
  std::vector<Polynomial> b;
  bool operator==(const CustomFamily&) const = default;
};

struct RunConfig {
  FamilyKind family = FamilyKind::square_scalar;
  int n = 3;
  std::optional<double> mu;
  std::optional<double> k;
  std::optional<std::vector<double>> a;  // for euclidean-parallel: the constant b_i
  int sign = 1;                          // square-constant only
  int samples = 16;
  std::uint64_t seed = 1;
  double radius = 0.4;  // fraction of the chart radius
  std::map<std::string, double> tolerances;
  Guards guards;
  std::optional<Perturbation> perturb;
  std::optional<CustomFamily> custom;
  std::string output;
  ReportFormat format = ReportFormat::json;

  /// Throws contract_violation on incompatible or out-of-range settings.
  void validate() const;
  double tolerance(const std::string& row) const;
  bool operator==(const RunConfig&) const = default;
};

/// Row names in report order.
const std::vector<std::string>& report_rows();
const std::map<std::string, double>& default_tolerances();

/// Reads a JSON config; fields present in it override `base`.
RunConfig parse_config(std::string_view json_text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// The model plus what is known in closed form about it.
struct BuiltFamily {
  SquareMetricModel model;
  double chart_radius = 1.0;
  double scale = 1.0;                 // F = scale * F_family, for the curvature of the deformed h
  std::optional<double> expected_mu;  // that curvature in the family normalization
  // Closed forms where the family has them; empty otherwise.
  std::function<double(std::span<const double>, double, double)> K_formula;  // (x, alpha, beta)
  std::function<double(std::span<const double>)> c_formula;
  std::function<double(std::span<const double>)> tau_printed;
  std::function<double(std::span<const double>)> tau_chain;
};

BuiltFamily build_family(const RunConfig& config);

/// Per-(x, y) results.
struct SampleRecord {
  std::vector<double> x;
  std::vector<double> y;
  double F = 0.0;
  double K_hat = 0.0;
  std::optional<double> K_formula;
  double K_coefficients = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
  double u = 0.0;
  bool u_indeterminate = false;
  std::optional<double> tau_printed;
  std::optional<double> tau_chain;
  std::map<std::string, double> residuals;
  bool operator==(const SampleRecord&) const = default;
};

SampleRecord evaluate_sample(const BuiltFamily& family, const std::vector<double>& x, const std::vector<double>& y);

struct RowResult {
  std::string name;
  std::string description;
  bool applicable = true;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool operator==(const RowResult&) const = default;
};

struct ReportSummary {
  std::vector<RowResult> rows;
  std::map<std::string, double> max_residuals;
  double mu_hat = 0.0;
  double delta_mean = 0.0;
  double delta_stddev = 0.0;
  std::optional<double> K_min;
  std::optional<double> K_max;
  std::string tau_verdict = "n/a";
  std::string rigidity_case;
  int resamples = 0;
  bool pass = false;
  bool operator==(const ReportSummary&) const = default;
};

struct VerificationReport {
  int schema = 1;
  RunConfig config;
  std::vector<SampleRecord> samples;
  ReportSummary summary;
  bool operator==(const VerificationReport&) const = default;
};

/// Samples x uniformly in the ball of radius config.radius * chart radius and
/// y uniformly on the unit sphere, resampling inadmissible pairs up to 100
/// times; throws family_inadmissible when that budget runs out.
VerificationReport run_verify(const RunConfig& config);

std::string emit_report(const VerificationReport& report, ReportFormat format);
VerificationReport parse_report(std::string_view json_text);

/// Writes the serialized report; io_failure on file-system errors.
void write_report(const VerificationReport& report, ReportFormat format, const std::string& path);

/// Single-point curvature summary used by the `curvature` subcommand.
std::string emit_sample(const SampleRecord& record, const RunConfig& config, ReportFormat format);
bool sample_passes(const SampleRecord& record, const RunConfig& config);

}  // namespace sqfinsler
