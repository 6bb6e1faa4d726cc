#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqfinsler/verify.hpp"

namespace py = pybind11;
using namespace sqfinsler;

namespace {

RunConfig config_from(const std::string& json_text) { return parse_config(json_text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical verification engine for square Finsler metrics";

  static py::exception<Error> error(m, "SqfinslerError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io_failure) {
        PyErr_SetString(PyExc_OSError, e.what());
      } else {
        py::object kind = py::str(to_string(e.kind()));
        py::object exc = py::handle(error.ptr())(py::str(e.what()));
        exc.attr("kind") = kind;
        PyErr_SetObject(error.ptr(), exc.ptr());
      }
    }
  });

  m.def(
      "verify_json",
      [](const std::string& config_json) {
        const VerificationReport r = run_verify(config_from(config_json));
        return emit_report(r, ReportFormat::json);
      },
      py::arg("config_json"), py::call_guard<py::gil_scoped_release>(),
      "Run the verification suite for a JSON config and return the JSON report.");

  m.def(
      "verify_text",
      [](const std::string& config_json) {
        return emit_report(run_verify(config_from(config_json)), ReportFormat::text);
      },
      py::arg("config_json"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "curvature_json",
      [](const std::string& config_json, const std::vector<double>& x, const std::vector<double>& y) {
        const RunConfig c = config_from(config_json);
        return emit_sample(evaluate_sample(build_family(c), x, y), c, ReportFormat::json);
      },
      py::arg("config_json"), py::arg("x"), py::arg("y"),
      "F, flag curvature and every per-point residual at one (x, y).");

  m.def("report_rows", &report_rows);
  m.def("default_tolerances", &default_tolerances);

  m.def(
      "rigidity_bounds",
      [](double mu, double delta) {
        const CurvatureBounds b = rigidity_bounds(mu, delta);
        return std::make_pair(b.K_min, b.K_max);
      },
      py::arg("mu"), py::arg("delta"));

  py::class_<FamilyParams>(m, "FamilyParams")
      .def(py::init([](double mu, double k, std::vector<double> a) {
             FamilyParams p{mu, k, std::move(a)};
             p.validate();
             return p;
           }),
           py::arg("mu"), py::arg("k"), py::arg("a"))
      .def_readonly("mu", &FamilyParams::mu)
      .def_readonly("k", &FamilyParams::k)
      .def_readonly("a", &FamilyParams::a)
      .def("c", [](const FamilyParams& p, const std::vector<double>& x) { return p.c(x); })
      .def("sigma2", [](const FamilyParams& p, const std::vector<double>& x) { return p.sigma2(x); })
      .def("tau_printed", [](const FamilyParams& p, const std::vector<double>& x) { return p.tau_printed(x); })
      .def("tau_chain", [](const FamilyParams& p, const std::vector<double>& x) { return p.tau_chain(x); })
      .def("conformal_invariant", &FamilyParams::conformal_invariant)
      .def("delta", &FamilyParams::delta);
}
