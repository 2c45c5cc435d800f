#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loewner/cli.hpp"

namespace py = pybind11;
using namespace loewner;

namespace {

py::dict becker_dict(const BeckerReport& r) {
  py::dict d;
  d["is_becker"] = r.is_becker;
  d["tolerance"] = r.tolerance;
  d["worst_n"] = r.worst_n;
  d["worst_rho"] = r.worst_rho;
  d["worst_abs"] = r.worst_abs;
  d["max_abs_mu"] = r.max_abs_mu;
  py::list circles;
  for (const auto& c : r.circles) {
    py::dict cd;
    cd["rho"] = c.rho;
    py::dict coeffs;
    const int half = static_cast<int>(c.a.size() / 2);
    for (int n = -half; n < half; ++n) coeffs[py::int_(n)] = c.coefficient(n);
    cd["coefficients"] = coeffs;
    circles.append(cd);
  }
  d["circles"] = circles;
  return d;
}

ClosedFormMap closed_form(const std::string& spec) {
  MapSpec m = parse_map(spec);
  if (!m.closed_form) throw py::value_error("expected a closed-form map (f1, f2, fn, fsigma)");
  return *m.closed_form;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Loewner chains, Becker extensions and Beltrami diagnostics";

  // The module attribute keeps the exception type alive.
  static PyObject* error_type = py::exception<Error>(m, "LoewnerError", PyExc_RuntimeError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("evolve", [](const std::string& tau, const std::string& p, double s, double t, cplx z, double rtol) {
        ode::Settings st = default_chain_solver();
        st.rtol = rtol;
        EvolutionTrajectory e(VectorField(parse_driving(tau), parse_herglotz(p)), st);
        const DerivativePair d = e.evolve_with_derivative(s, t, z);
        return py::make_tuple(d.value, d.dz);
      },
      py::arg("tau"), py::arg("p"), py::arg("s"), py::arg("t"), py::arg("z"), py::arg("rtol") = 1e-10,
      "phi_{s,t}(z) and its z-derivative.");

  py::class_<ChainEvaluator, std::shared_ptr<ChainEvaluator>>(m, "Chain")
      .def(py::init([](const std::string& p, const std::string& tau, const std::string& mode, double rtol) {
             VectorField field(parse_driving(tau), parse_herglotz(p));
             ChainSettings cs;
             cs.mode = mode.empty() ? (field.radial() ? ChainMode::radial : ChainMode::mobius) : chain_mode_from_string(mode);
             ode::Settings st = default_chain_solver();
             st.rtol = rtol;
             return std::make_shared<ChainEvaluator>(std::move(field), cs, st);
           }),
           py::arg("p"), py::arg("tau") = "0", py::arg("mode") = "", py::arg("rtol") = 1e-10)
      .def("__call__", [](const ChainEvaluator& c, double s, cplx z) { return c.eval(s, z); }, py::arg("s"), py::arg("z"))
      .def("eval", [](const ChainEvaluator& c, double s, std::vector<cplx> zs) {
             std::vector<cplx> out;
             for (cplx z : zs) out.push_back(c.eval(s, z));
             return out;
           },
           py::arg("s"), py::arg("points"))
      .def("extend", [](const ChainEvaluator& c, std::vector<double> radii, std::size_t n, double k) {
             QCExtensionGrid g = becker_extend(c, PolarGrid(std::move(radii), n), k);
             py::dict d;
             d["values"] = g.values;
             d["worst_residual"] = g.worst_residual;
             d["seam_discrepancy"] = g.seam ? g.seam->discrepancy : 0.0;
             return d;
           },
           py::arg("radii"), py::arg("n"), py::arg("k"));

  py::class_<ClosedFormMap>(m, "ClosedFormMap")
      .def(py::init(&closed_form), py::arg("spec"))
      .def_readonly("name", &ClosedFormMap::name)
      .def_readonly("parameters", &ClosedFormMap::parameters)
      .def_readonly("dilatation", &ClosedFormMap::dilatation)
      .def("__call__", [](const ClosedFormMap& f, cplx z) { return f(z); })
      .def("mu", [](const ClosedFormMap& f, cplx z) { return f.mu(z); })
      .def("describe", &ClosedFormMap::describe);

  py::class_<BeltramiField>(m, "BeltramiField")
      .def(py::init([](std::vector<double> radii, std::vector<std::vector<cplx>> traces, bool exact) {
             return BeltramiField::from_traces(std::move(radii), std::move(traces), exact);
           }),
           py::arg("radii"), py::arg("traces"), py::arg("exact") = false)
      .def_readonly("radii", &BeltramiField::radii)
      .def_readonly("traces", &BeltramiField::traces)
      .def_readonly("max_dilatation", &BeltramiField::max_dilatation)
      .def_readonly("jacobian_sign_ok", &BeltramiField::jacobian_sign_ok)
      .def_readonly("exact", &BeltramiField::exact)
      .def_readonly("error_estimate", &BeltramiField::error_estimate);

  m.def("beltrami_field", [](const std::string& map, std::vector<double> radii, std::size_t n, double h) {
        BeltramiOptions o;
        o.wirtinger.h = h;
        return beltrami_field(PlanarMapSampler::from_closed_form(closed_form(map)), radii, n, o);
      },
      py::arg("map"), py::arg("radii"), py::arg("n"), py::arg("h") = 1e-5,
      "Numerical Beltrami coefficient of a closed-form extension.");

  m.def("classify_becker", [](const BeltramiField& f, std::optional<double> tol) { return becker_dict(classify_becker(f, tol)); },
        py::arg("field"), py::arg("tolerance") = py::none());

  m.def("schwarzian", [](const std::string& map, cplx z) {
        MapSpec s = parse_map(map);
        return s.mobius ? schwarzian(*s.mobius, z) : schwarzian(*s.closed_form, z);
      },
      py::arg("map"), py::arg("z"));

  m.def("schwarzian_norm", [](const std::string& map, std::optional<double> k) {
        const ClosedFormMap f = closed_form(map);
        const SchwarzianReport r = schwarzian_norm(f, schwarzian_grid(), k ? k : std::optional<double>(f.dilatation));
        py::dict d;
        d["norm"] = r.norm;
        d["argmax"] = r.argmax;
        d["necessary_bound"] = r.necessary_bound;
        d["within_necessary"] = r.within_necessary;
        d["sufficiency_k"] = r.sufficiency_k;
        d["sufficient"] = r.sufficient;
        return d;
      },
      py::arg("map"), py::arg("k") = py::none());

  m.def("run", [](const std::map<std::string, std::string>& settings) {
        Config c;
        for (const auto& [k, v] : settings) c.set(k, v);
        RunOutcome r = run(c);
        return py::make_tuple(r.exit_code, dump_json(r.envelope));
      },
      py::arg("config"), "Run a subcommand; returns (exit_code, envelope JSON text).");

  m.def("parse_config", [](const std::string& text) { return Config::parse(text).values(); });
  m.def("serialize_config", [](const std::map<std::string, std::string>& values) {
    Config c;
    for (const auto& [k, v] : values) c.set(k, v);
    return c.serialize();
  });

  m.attr("__version__") = kArtifactVersion;
}
