#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sqfinsler/verify.hpp"

using namespace sqfinsler;

namespace {

RunConfig scalar_config(int samples) {
  RunConfig c;
  c.family = FamilyKind::square_scalar;
  c.mu = 1.0;
  c.k = 0.3;
  c.a = std::vector<double>{0.1, 0.2, 0.05};
  c.samples = samples;
  return c;
}

const RowResult& row(const VerificationReport& r, const std::string& name) {
  for (const auto& row : r.summary.rows)
    if (row.name == name) return row;
  throw std::runtime_error("missing row " + name);
}

}  // namespace

TEST_CASE("euclidean-parallel passes with tiny residuals") {
  RunConfig c;
  c.family = FamilyKind::euclidean_parallel;
  c.a = std::vector<double>{0.2, -0.1, 0.3};
  const VerificationReport r = run_verify(c);
  CHECK(r.summary.pass);
  CHECK(r.samples.size() == 16);
  for (const auto& [name, v] : r.summary.max_residuals) CHECK(v < 1e-9);
  CHECK(r.summary.rigidity_case == "flat-parallel");
}

TEST_CASE("scalar family passes the full pipeline") {
  const VerificationReport r = run_verify(scalar_config(64));
  CHECK(r.summary.pass);
  CHECK(r.summary.tau_verdict == "sigma3");
  CHECK(r.summary.rigidity_case == "positive-family");
  REQUIRE(r.summary.K_min);
  for (const auto& s : r.samples) {
    CHECK(s.K_hat >= *r.summary.K_min - 1e-8);
    CHECK(s.K_hat <= *r.summary.K_max + 1e-8);
  }
  CHECK(r.summary.resamples <= 64 / 20);
}

TEST_CASE("zero-curvature pair passes with K near 0") {
  RunConfig c;
  c.family = FamilyKind::square_constant;
  c.a = std::vector<double>{0.2, 0.0, 0.0};
  c.samples = 8;
  const VerificationReport r = run_verify(c);
  CHECK(r.summary.pass);
  for (const auto& s : r.samples) CHECK(std::abs(s.K_hat) < 1e-7);
}

TEST_CASE("perturbed beta makes the suite fail") {
  RunConfig c = scalar_config(8);
  c.perturb = Perturbation{0, 1.05};
  const VerificationReport r = run_verify(c);
  CHECK_FALSE(r.summary.pass);
  CHECK(r.summary.max_residuals.at("y1") > 1e-3);
  CHECK(r.summary.max_residuals.at("weyl") > 1e-3);
  CHECK(r.summary.max_residuals.at("scalar-flag") > 1e-3);
  CHECK_FALSE(row(r, "y1").pass);
}

TEST_CASE("report is deterministic and round-trips") {
  const RunConfig c = scalar_config(4);
  const VerificationReport a = run_verify(c);
  const VerificationReport b = run_verify(c);
  const std::string ja = emit_report(a, ReportFormat::json);
  CHECK(ja == emit_report(b, ReportFormat::json));
  CHECK(ja.find("\"schema\": 1") != std::string::npos);

  const VerificationReport back = parse_report(ja);
  CHECK(back == a);
  CHECK(emit_report(back, ReportFormat::json) == ja);

  RunConfig other = c;
  other.seed = 2;
  CHECK(emit_report(run_verify(other), ReportFormat::json) != ja);
}

TEST_CASE("text summary lists every check row") {
  const std::string text = emit_report(run_verify(scalar_config(2)), ReportFormat::text);
  for (const char* name : {"y1", "y2", "y3", "qq", "weyl", "douglas", "scalar-flag", "proj-flat", "deform-constcurv",
                           "deform-conformal", "delta-const", "bounds"}) {
    CHECK_MESSAGE(text.find(std::string("\n") + name + " ") != std::string::npos, name);
  }
  CHECK(text.find("result        PASS") != std::string::npos);
}

TEST_CASE("config validation") {
  RunConfig c;
  c.family = FamilyKind::square_constant;
  c.mu = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.mu.reset();
  c.validate();
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.samples = 1;
  c.tolerances["y1"] = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.tolerances = {{"no-such-row", 1e-6}};
  CHECK_THROWS_AS(c.validate(), Error);

  RunConfig s;
  s.family = FamilyKind::space_form;
  s.k = 0.1;
  CHECK_THROWS_AS(s.validate(), Error);
  s.k.reset();
  s.n = 2;
  CHECK_THROWS_AS(run_verify(s), Error);

  RunConfig custom;
  custom.family = FamilyKind::custom;
  CHECK_THROWS_AS(custom.validate(), Error);
}

TEST_CASE("config file overrides and custom family") {
  const RunConfig base = scalar_config(4);
  const RunConfig c = parse_config(R"({
    "family": "custom", "mu": null, "k": null, "a": null, "samples": 3,
    "custom": {"phi": [{"coefficient": 0.1, "powers": [2, 0, 0]}],
               "b": [[{"coefficient": 0.2, "powers": [0, 0, 0]}], [], []]}
  })",
                                   base);
  CHECK(c.family == FamilyKind::custom);
  CHECK(c.samples == 3);
  CHECK(c.seed == base.seed);
  REQUIRE(c.custom);
  CHECK(c.custom->b.size() == 3);
  const VerificationReport r = run_verify(c);
  CHECK(r.samples.size() == 3);
  // A non-flat conformal metric with a constant form is not in the classified family.
  CHECK_FALSE(r.summary.pass);

  CHECK_THROWS_AS(parse_config("{\"bogus\": 1}"), Error);
  CHECK_THROWS_AS(parse_config("{not json"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("inadmissible family and output errors") {
  RunConfig c;
  c.family = FamilyKind::euclidean_parallel;
  c.a = std::vector<double>{1.2, 0.0, 0.0};  // b^2 > 1 everywhere
  try {
    run_verify(c);
    FAIL("expected family_inadmissible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::family_inadmissible);
    CHECK(std::string(e.what()).find("family inadmissible with these parameters") != std::string::npos);
  }

  const VerificationReport r = run_verify(scalar_config(1));
  try {
    write_report(r, ReportFormat::json, "/nonexistent/dir/report.json");
    FAIL("expected io_failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_failure);
  }
  const auto path = std::filesystem::temp_directory_path() / "sqfinsler_report_test.json";
  write_report(r, ReportFormat::json, path.string());
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(parse_report(text.str()) == r);
  std::filesystem::remove(path);
}

TEST_CASE("single-point evaluation") {
  RunConfig c;
  c.family = FamilyKind::space_form;
  c.mu = -1.0;
  const BuiltFamily f = build_family(c);
  const SampleRecord s = evaluate_sample(f, {0.1, 0.0, 0.2}, {0.0, 1.0, 0.0});
  CHECK(s.K_hat == doctest::Approx(-1.0).epsilon(1e-10));
  REQUIRE(s.K_formula);
  CHECK(*s.K_formula == -1.0);
  CHECK(sample_passes(s, c));
  CHECK(emit_sample(s, c, ReportFormat::text).find("K_formula") != std::string::npos);
  CHECK(emit_sample(s, c, ReportFormat::json).find("\"schema\": 1") != std::string::npos);
  CHECK_THROWS_AS(evaluate_sample(f, {0.1, 0.0}, {0.0, 1.0, 0.0}), Error);
}

TEST_CASE("parsers") {
  CHECK(parse_family("square-constant") == FamilyKind::square_constant);
  CHECK_THROWS_AS(parse_family("round"), Error);
  CHECK(parse_format("text") == ReportFormat::text);
  CHECK_THROWS_AS(parse_format("xml"), Error);
  const Perturbation p = parse_perturbation("2:0.95");
  CHECK(p.index == 2);
  CHECK(p.factor == 0.95);
  CHECK_THROWS_AS(parse_perturbation("2"), Error);
  CHECK_THROWS_AS(parse_perturbation("x:1"), Error);
  CHECK(report_rows().size() == default_tolerances().size());
}
