#include "sqfinsler/verify.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace sqfinsler {

using nlohmann::ordered_json;

namespace {

constexpr int kMaxRetries = 100;
constexpr double kMuPositive = 1e-8;
constexpr double kRigidityTol = 1e-8;
constexpr double kTauMatch = 1e-7;

struct RowInfo {
  const char* name;
  const char* description;
  double tolerance;
};

const std::vector<RowInfo>& row_table() {
  static const std::vector<RowInfo> rows = {
      {"spray", "generic and closed-form sprays agree", 1e-8},
      {"y1", "b_{i|j} = tau((1 + 2b^2) a_ij - 3 b_i b_j)", 1e-6},
      {"y2", "curvature of alpha fits the lambda/eta ansatz", 1e-6},
      {"y3", "d tau = u beta", 1e-6},
      {"qq", "eta and u identities", 1e-6},
      {"weyl", "Weyl curvature vanishes", 1e-6},
      {"douglas", "Douglas curvature vanishes", 1e-6},
      {"scalar-flag", "R^i_k = K (F^2 delta - y^i y_k)", 1e-6},
      {"proj-flat", "G^i = P y^i in the model chart", 1e-7},
      {"k-formula", "extracted K matches the closed forms", 1e-6},
      {"deform-constcurv", "h = (1 - b^2) alpha has constant curvature", 1e-6},
      {"deform-conformal", "omega = sqrt(1 - b^2) beta is closed conformal for h", 1e-8},
      {"delta-const", "|grad c|^2 + mu c^2 is constant", 1e-7},
      {"bounds", "K inside the rigidity bounds (mu > 0)", 1e-8},
      {"tau-exponent", "a closed form of tau matches the fitted tau", 1e-7},
  };
  return rows;
}

const RowInfo& row_info(const std::string& name) {
  for (const auto& r : row_table())
    if (name == r.name) return r;
  throw Error(ErrorKind::contract_violation, "unknown residual name '" + name + "'");
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

// JSON has no NaN or infinity; they travel as null and come back as +inf.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double get_number(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ordered_json optional_number(const std::optional<double>& v) { return v ? number(*v) : ordered_json(nullptr); }

std::optional<double> get_optional(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ordered_json polynomial_json(const Polynomial& p) {
  ordered_json terms = ordered_json::array();
  for (const auto& t : p.terms) terms.push_back({{"coefficient", t.coefficient}, {"powers", t.powers}});
  return terms;
}

Polynomial polynomial_from(const ordered_json& j) {
  require(j.is_array(), "a polynomial is an array of {coefficient, powers} terms");
  Polynomial p;
  for (const auto& t : j) p.terms.push_back({t.at("coefficient").get<double>(), t.at("powers").get<std::vector<int>>()});
  return p;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["family"] = to_string(c.family);
  j["n"] = c.n;
  j["mu"] = optional_number(c.mu);
  j["k"] = optional_number(c.k);
  j["a"] = c.a ? ordered_json(*c.a) : ordered_json(nullptr);
  j["sign"] = c.sign;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["radius"] = c.radius;
  ordered_json tol = ordered_json::object();
  for (const auto& [name, value] : c.tolerances) tol[name] = value;
  j["tolerances"] = tol;
  j["guards"] = {{"eps_s", c.guards.eps_s}, {"eps_F", c.guards.eps_F}};
  j["perturb"] = c.perturb ? ordered_json{{"index", c.perturb->index}, {"factor", c.perturb->factor}}
                           : ordered_json(nullptr);
  if (c.custom) {
    ordered_json b = ordered_json::array();
    for (const auto& p : c.custom->b) b.push_back(polynomial_json(p));
    j["custom"] = {{"phi", polynomial_json(c.custom->phi)}, {"b", b}};
  } else {
    j["custom"] = nullptr;
  }
  j["output"] = c.output;
  j["format"] = c.format == ReportFormat::json ? "json" : "text";
  return j;
}

void apply_config(const ordered_json& j, RunConfig& c) {
  require(j.is_object(), "config must be a JSON object");
  static const std::vector<std::string> keys = {"family",  "n",          "mu",     "k",       "a",
                                                "sign",    "samples",    "seed",   "radius",  "tolerances",
                                                "guards",  "perturb",    "custom", "output",  "format"};
  for (const auto& [key, value] : j.items()) {
    require(std::find(keys.begin(), keys.end(), key) != keys.end(), "unknown config key '" + key + "'");
  }
  if (j.contains("family")) c.family = parse_family(j.at("family").get<std::string>());
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("mu")) c.mu = get_optional(j, "mu");
  if (j.contains("k")) c.k = get_optional(j, "k");
  if (j.contains("a")) {
    if (j.at("a").is_null()) c.a.reset();
    else c.a = j.at("a").get<std::vector<double>>();
  }
  if (j.contains("sign")) c.sign = j.at("sign").get<int>();
  if (j.contains("samples")) c.samples = j.at("samples").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("radius")) c.radius = j.at("radius").get<double>();
  if (j.contains("tolerances")) {
    for (const auto& [name, value] : j.at("tolerances").items()) c.tolerances[name] = value.get<double>();
  }
  if (j.contains("guards")) {
    const auto& g = j.at("guards");
    if (g.contains("eps_s")) c.guards.eps_s = g.at("eps_s").get<double>();
    if (g.contains("eps_F")) c.guards.eps_F = g.at("eps_F").get<double>();
  }
  if (j.contains("perturb")) {
    const auto& p = j.at("perturb");
    if (p.is_null()) c.perturb.reset();
    else if (p.is_string()) c.perturb = parse_perturbation(p.get<std::string>());
    else c.perturb = Perturbation{p.at("index").get<int>(), p.at("factor").get<double>()};
  }
  if (j.contains("custom")) {
    const auto& cu = j.at("custom");
    if (cu.is_null()) {
      c.custom.reset();
    } else {
      CustomFamily fam;
      if (cu.contains("phi")) fam.phi = polynomial_from(cu.at("phi"));
      for (const auto& b : cu.at("b")) fam.b.push_back(polynomial_from(b));
      c.custom = std::move(fam);
    }
  }
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
}

ordered_json sample_json(const SampleRecord& s) {
  ordered_json j;
  j["x"] = s.x;
  j["y"] = s.y;
  j["F"] = number(s.F);
  j["K_hat"] = number(s.K_hat);
  j["K_formula"] = optional_number(s.K_formula);
  j["K_coefficients"] = number(s.K_coefficients);
  j["tau"] = number(s.tau);
  j["lambda"] = number(s.lambda);
  j["eta"] = number(s.eta);
  j["u"] = number(s.u);
  j["u_indeterminate"] = s.u_indeterminate;
  j["tau_printed"] = optional_number(s.tau_printed);
  j["tau_chain"] = optional_number(s.tau_chain);
  ordered_json res = ordered_json::object();
  for (const auto& [name, value] : s.residuals) res[name] = number(value);
  j["residuals"] = res;
  return j;
}

SampleRecord sample_from(const ordered_json& j) {
  SampleRecord s;
  s.x = j.at("x").get<std::vector<double>>();
  s.y = j.at("y").get<std::vector<double>>();
  s.F = get_number(j.at("F"));
  s.K_hat = get_number(j.at("K_hat"));
  s.K_formula = get_optional(j, "K_formula");
  s.K_coefficients = get_number(j.at("K_coefficients"));
  s.tau = get_number(j.at("tau"));
  s.lambda = get_number(j.at("lambda"));
  s.eta = get_number(j.at("eta"));
  s.u = get_number(j.at("u"));
  s.u_indeterminate = j.at("u_indeterminate").get<bool>();
  s.tau_printed = get_optional(j, "tau_printed");
  s.tau_chain = get_optional(j, "tau_chain");
  for (const auto& [name, value] : j.at("residuals").items()) s.residuals[name] = get_number(value);
  return s;
}

ordered_json summary_json(const ReportSummary& s) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"name", r.name},
                    {"description", r.description},
                    {"applicable", r.applicable},
                    {"value", number(r.value)},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass}});
  }
  ordered_json max = ordered_json::object();
  for (const auto& [name, value] : s.max_residuals) max[name] = number(value);
  ordered_json j;
  j["rows"] = rows;
  j["max_residuals"] = max;
  j["mu_hat"] = number(s.mu_hat);
  j["delta_mean"] = number(s.delta_mean);
  j["delta_stddev"] = number(s.delta_stddev);
  j["K_min"] = optional_number(s.K_min);
  j["K_max"] = optional_number(s.K_max);
  j["tau_verdict"] = s.tau_verdict;
  j["rigidity_case"] = s.rigidity_case;
  j["resamples"] = s.resamples;
  j["pass"] = s.pass;
  return j;
}

ReportSummary summary_from(const ordered_json& j) {
  ReportSummary s;
  for (const auto& r : j.at("rows")) {
    s.rows.push_back({r.at("name").get<std::string>(), r.at("description").get<std::string>(),
                      r.at("applicable").get<bool>(), get_number(r.at("value")), r.at("tolerance").get<double>(),
                      r.at("pass").get<bool>()});
  }
  for (const auto& [name, value] : j.at("max_residuals").items()) s.max_residuals[name] = get_number(value);
  s.mu_hat = get_number(j.at("mu_hat"));
  s.delta_mean = get_number(j.at("delta_mean"));
  s.delta_stddev = get_number(j.at("delta_stddev"));
  s.K_min = get_optional(j, "K_min");
  s.K_max = get_optional(j, "K_max");
  s.tau_verdict = j.at("tau_verdict").get<std::string>();
  s.rigidity_case = j.at("rigidity_case").get<std::string>();
  s.resamples = j.at("resamples").get<int>();
  s.pass = j.at("pass").get<bool>();
  return s;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

std::string format_vector(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(6) << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

std::vector<double> random_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::vector<double> v(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& c : v) {
      c = normal(rng);
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  const double r = radius * std::pow(uniform(rng), 1.0 / n) / std::sqrt(norm2);
  for (auto& c : v) c *= r;
  return v;
}

std::vector<double> random_sphere(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& c : v) {
      c = normal(rng);
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& c : v) c *= s;
  return v;
}

bool recoverable(const Error& e) {
  return e.kind() != ErrorKind::contract_violation && e.kind() != ErrorKind::io_failure;
}

}  // namespace

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::euclidean_parallel: return "euclidean-parallel";
    case FamilyKind::space_form: return "space-form";
    case FamilyKind::square_scalar: return "square-scalar";
    case FamilyKind::square_constant: return "square-constant";
    case FamilyKind::custom: return "custom";
  }
  return "unknown";
}

FamilyKind parse_family(std::string_view name) {
  for (auto kind : {FamilyKind::euclidean_parallel, FamilyKind::space_form, FamilyKind::square_scalar,
                    FamilyKind::square_constant, FamilyKind::custom}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::contract_violation, "unknown family '" + std::string(name) + "'");
}

ReportFormat parse_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "text") return ReportFormat::text;
  throw Error(ErrorKind::contract_violation, "unknown format '" + std::string(name) + "' (json or text)");
}

Perturbation parse_perturbation(std::string_view text) {
  const auto colon = text.find(':');
  require(colon != std::string_view::npos, "perturbation must read index:factor");
  Perturbation p;
  try {
    std::size_t used = 0;
    const std::string index(text.substr(0, colon)), factor(text.substr(colon + 1));
    p.index = std::stoi(index, &used);
    require(used == index.size(), "bad perturbation index");
    p.factor = std::stod(factor, &used);
    require(used == factor.size(), "bad perturbation factor");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::contract_violation, "perturbation must read index:factor");
  }
  return p;
}

const std::vector<std::string>& report_rows() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& r : row_table()) out.emplace_back(r.name);
    return out;
  }();
  return names;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol = [] {
    std::map<std::string, double> out;
    for (const auto& r : row_table()) out[r.name] = r.tolerance;
    return out;
  }();
  return tol;
}

double RunConfig::tolerance(const std::string& row) const {
  const auto it = tolerances.find(row);
  return it != tolerances.end() ? it->second : row_info(row).tolerance;
}

void RunConfig::validate() const {
  require(n >= 2, "dimension must be at least 2");
  require(samples >= 1, "samples must be at least 1");
  require(radius > 0.0 && radius <= 1.0, "radius is a fraction of the chart radius in (0, 1]");
  require(sign == 1 || sign == -1, "sign must be +1 or -1");
  require(guards.eps_s > 0.0 && guards.eps_F > 0.0, "guards must be positive");
  for (const auto& [name, value] : tolerances) {
    row_info(name);
    require(value > 0.0 && std::isfinite(value), "tolerance for '" + name + "' must be positive");
  }
  if (mu) require(std::isfinite(*mu), "mu must be finite");
  if (k) require(std::isfinite(*k), "k must be finite");
  if (a) {
    require(static_cast<int>(a->size()) == n, "a must have n components");
    for (double v : *a) require(std::isfinite(v), "a must be finite");
  }
  if (perturb) {
    require(perturb->index >= 0 && perturb->index < n, "perturbation index out of range");
    require(std::isfinite(perturb->factor), "perturbation factor must be finite");
  }
  require(sign == 1 || family == FamilyKind::square_constant, "sign applies to square-constant only");
  require(!custom || family == FamilyKind::custom, "custom polynomials need family=custom");
  switch (family) {
    case FamilyKind::euclidean_parallel:
      require(!mu && !k, "euclidean-parallel takes a (the constant b_i) only");
      break;
    case FamilyKind::space_form:
      require(!k && !a, "space-form takes mu only");
      break;
    case FamilyKind::square_scalar:
      break;
    case FamilyKind::square_constant:
      require(!mu && !k, "square-constant takes a and sign only");
      break;
    case FamilyKind::custom:
      require(!mu && !k && !a, "custom takes polynomial tables only");
      require(custom.has_value(), "custom family needs phi and b tables");
      require(static_cast<int>(custom->b.size()) == n, "custom b needs n polynomials");
      custom->phi.validate(n, 4);
      for (const auto& p : custom->b) p.validate(n, 4);
      break;
  }
}

RunConfig parse_config(std::string_view json_text, RunConfig base) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::contract_violation, std::string("malformed config: ") + e.what());
  }
  try {
    apply_config(j, base);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::contract_violation, std::string("bad config value: ") + e.what());
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_failure, path + ": " + std::strerror(errno));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

BuiltFamily build_family(const RunConfig& config) {
  config.validate();
  const int n = config.n;
  const std::vector<double> a = config.a.value_or(std::vector<double>(n, 0.0));

  auto make = [&](MetricField alpha, FormField beta, double chart) {
    if (config.perturb) beta = perturbed_form(beta, config.perturb->index, config.perturb->factor);
    return BuiltFamily{SquareMetricModel(std::move(alpha), std::move(beta), config.guards), chart, 1.0,
                       std::nullopt, {}, {}, {}, {}};
  };

  switch (config.family) {
    case FamilyKind::euclidean_parallel: {
      BuiltFamily f = make(euclidean_metric(n), constant_form(a), 1.0);
      f.expected_mu = 0.0;
      f.K_formula = [](std::span<const double>, double, double) { return 0.0; };
      f.c_formula = [](std::span<const double>) { return 0.0; };
      return f;
    }
    case FamilyKind::space_form: {
      const double mu = config.mu.value_or(0.0);
      BuiltFamily f = make(space_form(mu, n), zero_form(n), SpaceFormParams::standard(mu).r_max);
      f.expected_mu = mu;
      f.K_formula = [mu](std::span<const double>, double, double) { return mu; };
      f.c_formula = [](std::span<const double>) { return 0.0; };
      return f;
    }
    case FamilyKind::square_scalar: {
      FamilyParams p{config.mu.value_or(0.0), config.k.value_or(0.0), a};
      p.validate();
      const SquareMetricModel m = model_family(p, config.guards);
      BuiltFamily f = make(m.alpha(), m.beta(), p.chart_radius());
      f.expected_mu = p.mu;
      f.K_formula = [p](std::span<const double> x, double al, double be) {
        return curvature_formula_th2(p, x, al, be);
      };
      f.c_formula = [p](std::span<const double> x) { return p.c(x); };
      f.tau_printed = [p](std::span<const double> x) { return p.tau_printed(x); };
      f.tau_chain = [p](std::span<const double> x) { return p.tau_chain(x); };
      return f;
    }
    case FamilyKind::square_constant: {
      const SquareMetricModel m = constant_curvature_family(a, config.sign, config.guards);
      const FamilyEquivalent eq = constant_curvature_equivalent(a, config.sign);
      // The pair lives on the unit ball; keep clear of its boundary.
      BuiltFamily f = make(m.alpha(), m.beta(), 0.99);
      const double s = eq.scale;
      const FamilyParams p = eq.params;
      f.scale = s;
      f.expected_mu = -p.k * p.k / (1.0 + dot<double>(p.a, p.a));
      f.K_formula = [](std::span<const double>, double, double) { return 0.0; };
      f.c_formula = [p, s](std::span<const double> x) { return p.c(x) / s; };
      f.tau_printed = [p, s](std::span<const double> x) { return p.tau_printed(x) / s; };
      f.tau_chain = [p, s](std::span<const double> x) { return p.tau_chain(x) / s; };
      return f;
    }
    case FamilyKind::custom: {
      return make(conformal_poly_metric(n, config.custom->phi), polynomial_form(n, config.custom->b), 1.0);
    }
  }
  throw Error(ErrorKind::contract_violation, "unknown family");
}

SampleRecord evaluate_sample(const BuiltFamily& family, const std::vector<double>& x, const std::vector<double>& y) {
  const SquareMetricModel& model = family.model;
  const int n = model.dim();
  require(static_cast<int>(x.size()) == n && static_cast<int>(y.size()) == n, "point and direction need n components");
  require(n >= 3, "the verification stack needs n >= 3");
  model.check_admissible(x, y);

  const CurvatureBundle bundle = curvature_bundle(model, x, y);
  const auto dirs = spread_directions(n);
  const Theorem1Residuals th = theorem1_residuals(model.alpha(), model.beta(), x, dirs);

  SampleRecord s;
  s.x = x;
  s.y = y;
  s.F = bundle.F;
  s.K_hat = bundle.K;
  s.K_coefficients = flag_curvature_theorem1(model.alpha(), model.beta(), th.tau, th.lambda, x, y);
  s.tau = th.tau;
  s.lambda = th.lambda;
  s.eta = th.eta;
  s.u = th.u;
  s.u_indeterminate = th.u_indeterminate;

  double k_res = rel_diff(s.K_hat, s.K_coefficients);
  if (family.K_formula) {
    const double al = std::sqrt(quadratic_form<double>(model.alpha().components<double>(x), y, y));
    const double be = dot<double>(model.beta().at(x), y);
    s.K_formula = family.K_formula(x, al, be);
    k_res = std::max(k_res, rel_diff(s.K_hat, *s.K_formula));
  }
  if (family.tau_printed) s.tau_printed = family.tau_printed(x);
  if (family.tau_chain) s.tau_chain = family.tau_chain(x);

  s.residuals = {
      {"spray", bundle.residuals.spray_match},
      {"weyl", bundle.residuals.weyl},
      {"douglas", bundle.residuals.douglas},
      {"scalar-flag", bundle.residuals.scalar_flag},
      {"proj-flat", bundle.residuals.proj_flat},
      {"y1", th.residual_y1},
      {"y2", th.residual_y2},
      {"y3", th.residual_y3},
      {"qq", std::max(th.residual_qq_eta, th.residual_qq_u)},
      {"k-formula", k_res},
  };
  return s;
}

VerificationReport run_verify(const RunConfig& config) {
  const BuiltFamily family = build_family(config);
  const int n = config.n;
  require(n >= 3, "verification needs n >= 3 (Weyl curvature is undefined below)");

  VerificationReport report;
  report.config = config;
  ReportSummary& sum = report.summary;

  std::mt19937_64 rng(config.seed);
  const double ball = config.radius * family.chart_radius;
  for (int i = 0; i < config.samples; ++i) {
    bool done = false;
    for (int attempt = 0; attempt <= kMaxRetries && !done; ++attempt) {
      const auto x = random_ball(rng, n, ball);
      const auto y = random_sphere(rng, n);
      try {
        report.samples.push_back(evaluate_sample(family, x, y));
        done = true;
      } catch (const Error& e) {
        if (!recoverable(e)) throw;
        ++sum.resamples;
      }
    }
    if (!done) throw Error(ErrorKind::family_inadmissible, "family inadmissible with these parameters");
  }

  std::map<std::string, double> value;
  for (const auto& s : report.samples) {
    for (const auto& [name, v] : s.residuals) {
      auto& m = value[name];
      m = std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(m, v);
    }
  }
  sum.max_residuals = value;

  std::vector<std::vector<double>> xs;
  std::vector<PointDirection> pds;
  for (const auto& s : report.samples) {
    xs.push_back(s.x);
    pds.push_back({s.x, s.y});
  }

  // Deformation: h should be a space form and omega closed conformal on it.
  const DeformedPair d = deform(family.model.alpha(), family.model.beta());
  const SectionalFit fit = sectional_constancy_residual(d.h, pds);
  sum.mu_hat = fit.mu;
  double constcurv = fit.residual;
  if (family.expected_mu) {
    const double scaled = fit.mu * family.scale * family.scale;
    constcurv = std::max(constcurv, std::abs(scaled - *family.expected_mu) / std::max(1.0, std::abs(*family.expected_mu)));
  }
  value["deform-constcurv"] = constcurv;

  const ClosedConformalCheck cc = check_closed_conformal(d.omega, d.h, xs);
  double conformal = cc.residual;
  double max_abs_c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    max_abs_c = std::max(max_abs_c, std::abs(cc.c[i]));
    if (family.c_formula) conformal = std::max(conformal, rel_diff(cc.c[i], family.c_formula(xs[i])));
  }
  value["deform-conformal"] = conformal;

  // delta^2 = |grad c|^2 + mu c^2 should not depend on the point.
  std::vector<double> f;
  for (const auto& x : xs) f.push_back(conformal_scalar_data(d.omega, d.h, fit.mu, x).invariant);
  const bool positive = fit.mu > kMuPositive;
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0, var = 0.0;
    for (double e : v) mean += e;
    mean /= v.size();
    for (double e : v) var += (e - mean) * (e - mean);
    return std::make_pair(mean, std::sqrt(var / v.size()));
  };
  std::vector<double> delta;
  for (double v : f) delta.push_back(std::sqrt(std::max(v, 0.0)));
  std::tie(sum.delta_mean, sum.delta_stddev) = stats(delta);
  // delta is only defined for mu > 0; otherwise the invariant itself must not vary.
  const auto [mean, stddev] = positive ? std::make_pair(sum.delta_mean, sum.delta_stddev) : stats(f);
  value["delta-const"] = std::abs(mean) > 1e-12 ? stddev / std::abs(mean) : stddev;

  bool bounds_applicable = false;
  if (positive) {
    bounds_applicable = true;
    const CurvatureBounds b = rigidity_bounds(fit.mu, sum.delta_mean);
    sum.K_min = b.K_min;
    sum.K_max = b.K_max;
    double worst = 0.0;
    for (const auto& s : report.samples) worst = std::max({worst, b.K_min - s.K_hat, s.K_hat - b.K_max});
    value["bounds"] = worst;
  }

  bool tau_applicable = false;
  if (family.tau_printed && family.tau_chain) {
    tau_applicable = true;
    double dp = 0.0, dc = 0.0;
    for (const auto& s : report.samples) {
      dp = std::max(dp, rel_diff(s.tau, *s.tau_printed));
      dc = std::max(dc, rel_diff(s.tau, *s.tau_chain));
    }
    const bool printed = dp <= kTauMatch, chain = dc <= kTauMatch;
    sum.tau_verdict = printed && chain ? "indistinguishable" : chain ? "sigma3" : printed ? "sigma6" : "neither";
    value["tau-exponent"] = std::min(dp, dc);
  }

  sum.rigidity_case = to_string(rigidity_case(fit.mu, max_abs_c, kRigidityTol));

  sum.pass = true;
  for (const auto& r : row_table()) {
    RowResult row{r.name, r.description, true, 0.0, config.tolerance(r.name), true};
    if ((row.name == "bounds" && !bounds_applicable) || (row.name == "tau-exponent" && !tau_applicable)) {
      row.applicable = false;
    } else {
      row.value = value.at(row.name);
      row.pass = row.value <= row.tolerance;
    }
    sum.pass = sum.pass && row.pass;
    sum.rows.push_back(std::move(row));
  }
  return report;
}

std::string emit_report(const VerificationReport& report, ReportFormat format) {
  require(!report.samples.empty(), "a report needs at least one sample");
  if (format == ReportFormat::json) {
    ordered_json j;
    j["schema"] = report.schema;
    j["config"] = config_json(report.config);
    ordered_json samples = ordered_json::array();
    for (const auto& s : report.samples) samples.push_back(sample_json(s));
    j["samples"] = samples;
    j["summary"] = summary_json(report.summary);
    return j.dump(2) + "\n";
  }

  const RunConfig& c = report.config;
  const ReportSummary& s = report.summary;
  std::ostringstream os;
  os << "family " << to_string(c.family) << "  n=" << c.n << "  samples=" << c.samples << "  seed=" << c.seed
     << "  radius=" << c.radius << "\n\n";
  os << std::left << std::setw(18) << "row" << std::setw(12) << "max" << std::setw(12) << "tol" << "status\n";
  for (const auto& r : s.rows) {
    os << std::left << std::setw(18) << r.name << std::setw(12) << (r.applicable ? format_value(r.value) : "-")
       << std::setw(12) << format_value(r.tolerance) << (!r.applicable ? "n/a" : r.pass ? "PASS" : "FAIL") << "   "
       << r.description << "\n";
  }
  os << "\nmu_hat        " << std::setprecision(10) << s.mu_hat << "\n";
  os << "delta         " << s.delta_mean << " +- " << std::setprecision(3) << s.delta_stddev << "\n";
  if (s.K_min) os << "K bounds      [" << std::setprecision(10) << *s.K_min << ", " << *s.K_max << "]\n";
  os << "tau verdict   " << s.tau_verdict << "\n";
  os << "rigidity      " << s.rigidity_case << "\n";
  os << "resamples     " << s.resamples << "\n";
  os << "result        " << (s.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

VerificationReport parse_report(std::string_view json_text) {
  try {
    const ordered_json j = ordered_json::parse(json_text);
    VerificationReport r;
    r.schema = j.at("schema").get<int>();
    require(r.schema == 1, "unsupported report schema " + std::to_string(r.schema));
    apply_config(j.at("config"), r.config);
    for (const auto& s : j.at("samples")) r.samples.push_back(sample_from(s));
    r.summary = summary_from(j.at("summary"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::contract_violation, std::string("malformed report: ") + e.what());
  }
}

void write_report(const VerificationReport& report, ReportFormat format, const std::string& path) {
  const std::string text = emit_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, path + ": " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::io_failure, path + ": " + std::strerror(errno));
}

bool sample_passes(const SampleRecord& record, const RunConfig& config) {
  for (const auto& [name, v] : record.residuals)
    if (!(v <= config.tolerance(name))) return false;
  return true;
}

std::string emit_sample(const SampleRecord& record, const RunConfig& config, ReportFormat format) {
  const bool pass = sample_passes(record, config);
  if (format == ReportFormat::json) {
    ordered_json j;
    j["schema"] = 1;
    j["family"] = to_string(config.family);
    j["sample"] = sample_json(record);
    ordered_json tol = ordered_json::object();
    for (const auto& [name, v] : record.residuals) tol[name] = config.tolerance(name);
    j["tolerances"] = tol;
    j["pass"] = pass;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << std::setprecision(12);
  os << "x             " << format_vector(record.x) << "\n";
  os << "y             " << format_vector(record.y) << "\n";
  os << "F             " << record.F << "\n";
  os << "K_hat         " << record.K_hat << "\n";
  os << "K_formula     ";
  if (record.K_formula) os << *record.K_formula << "\n";
  else os << "n/a\n";
  os << "K_coefficients " << record.K_coefficients << "\n";
  os << "tau           " << record.tau << "\n\n";
  for (const auto& r : row_table()) {
    const auto it = record.residuals.find(r.name);
    if (it == record.residuals.end()) continue;
    const double tol = config.tolerance(r.name);
    os << std::left << std::setw(14) << r.name << std::setw(12) << format_value(it->second) << std::setw(12)
       << format_value(tol) << (it->second <= tol ? "PASS" : "FAIL") << "\n";
  }
  os << "result        " << (pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace sqfinsler
