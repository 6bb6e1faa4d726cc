// sqfinsler: batch verification and single-point curvature for square metrics.
//
//   sqfinsler verify --family square-scalar --mu 1 --k 0.3 --a 0.1,0.2,0.05 --samples 64
//   sqfinsler curvature --family space-form --mu -1 --point 0.1,0,0 --direction 0,1,0
//
// Exit status: 0 when every check passes, 1 when one fails, 2 on errors.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sqfinsler/verify.hpp"

namespace {

using namespace sqfinsler;

std::vector<double> parse_csv(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw Error(ErrorKind::contract_violation, std::string("bad number '") + item + "' in " + what);
    out.push_back(v);
  }
  require(!out.empty(), std::string(what) + " is empty");
  return out;
}

std::map<std::string, double> parse_tolerances(const std::string& text) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    require(eq != std::string::npos, "--tol entries read name=value");
    out[item.substr(0, eq)] = parse_csv(item.substr(eq + 1), "--tol").at(0);
  }
  return out;
}

// Flags shared by both subcommands; they fill a RunConfig one-to-one.
struct FamilyFlags {
  std::string family = "square-scalar";
  int dim = 3;
  std::optional<double> mu, k;
  std::string a;
  int sign = 1;
  std::string tol;
  std::string perturb;
  double eps_s = Guards{}.eps_s;
  double eps_F = Guards{}.eps_F;
  std::string config;

  void attach(CLI::App* app) {
    app->add_option("--family", family, "euclidean-parallel | space-form | square-scalar | square-constant | custom");
    app->add_option("--dim", dim, "dimension n");
    app->add_option("--mu", mu, "curvature parameter mu");
    app->add_option("--k", k, "family parameter k");
    app->add_option("--a", a, "vector a as comma-separated values");
    app->add_option("--sign", sign, "sign of beta for square-constant (+1 or -1)");
    app->add_option("--tol", tol, "tolerance overrides name=value,...");
    app->add_option("--perturb", perturb, "scale one beta component, index:factor (negative control)");
    app->add_option("--eps-s", eps_s, "guard on |1 - s| and 1 + 2b^2 - 3s^2");
    app->add_option("--eps-F", eps_F, "guard on 1 + s");
    app->add_option("--config", config, "JSON config file; its fields override the flags");
  }

  RunConfig to_config() const {
    RunConfig c;
    c.family = parse_family(family);
    c.n = dim;
    c.mu = mu;
    c.k = k;
    if (!a.empty()) c.a = parse_csv(a, "--a");
    c.sign = sign;
    if (!tol.empty()) c.tolerances = parse_tolerances(tol);
    if (!perturb.empty()) c.perturb = parse_perturbation(perturb);
    c.guards = {eps_s, eps_F};
    return c;
  }

  RunConfig with_file(RunConfig c) const { return config.empty() ? c : load_config(config, std::move(c)); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of square Finsler metrics F = (alpha + beta)^2 / alpha"};
  app.require_subcommand(1);

  FamilyFlags vflags;
  int samples = RunConfig{}.samples;
  std::uint64_t seed = RunConfig{}.seed;
  double radius = RunConfig{}.radius;
  std::string out, format = "json";
  auto* verify = app.add_subcommand("verify", "sample a family and run every residual check");
  vflags.attach(verify);
  verify->add_option("--samples", samples, "number of sample points");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--radius", radius, "sampling ball as a fraction of the chart radius");
  verify->add_option("--out", out, "write the report here instead of stdout");
  verify->add_option("--format", format, "json | text");

  FamilyFlags cflags;
  std::string point, direction, cformat = "text";
  auto* curvature = app.add_subcommand("curvature", "curvature and residuals at one (x, y)");
  cflags.attach(curvature);
  curvature->add_option("--point", point, "x as comma-separated values")->required();
  curvature->add_option("--direction", direction, "y as comma-separated values")->required();
  curvature->add_option("--format", cformat, "json | text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // --help is not an error
  }

  try {
    if (verify->parsed()) {
      RunConfig base = vflags.to_config();
      base.samples = samples;
      base.seed = seed;
      base.radius = radius;
      base.output = out;
      base.format = parse_format(format);
      base = vflags.with_file(std::move(base));
      const VerificationReport report = run_verify(base);
      if (base.output.empty()) std::cout << emit_report(report, base.format);
      else write_report(report, base.format, base.output);
      return report.summary.pass ? 0 : 1;
    }

    const RunConfig config = cflags.with_file(cflags.to_config());
    const BuiltFamily family = build_family(config);
    const SampleRecord record = evaluate_sample(family, parse_csv(point, "--point"), parse_csv(direction, "--direction"));
    const ReportFormat f = parse_format(cformat);
    std::cout << emit_sample(record, config, f);
    return sample_passes(record, config) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "sqfinsler: " << e.what() << "\n";
    return 2;
  }
}
