#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "memkernel/commands.hpp"
#include "memkernel/direct.hpp"
#include "memkernel/energy.hpp"
#include "memkernel/equivalence.hpp"
#include "memkernel/errors.hpp"
#include "memkernel/inverse.hpp"
#include "memkernel/noise.hpp"

namespace py = pybind11;
using namespace memkernel;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::array_t<double> to_array(const Field& f) {
  py::array_t<double> a({static_cast<py::ssize_t>(f.rows()), static_cast<py::ssize_t>(f.cols())});
  std::copy(f.data().begin(), f.data().end(), a.mutable_data());
  return a;
}

TimeSeries to_series(py::array_t<double, py::array::c_style | py::array::forcecast> a, double dt) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array");
  return TimeSeries{std::vector<double>(a.data(), a.data() + a.size()), dt};
}

ProblemData make_problem(double beta, double p, double q, double ell, double T, int nx, int nt,
                         const std::string& u0, const std::string& u1, const std::string& phi) {
  ProblemData pd;
  pd.beta = beta;
  pd.p = p;
  pd.q = q;
  pd.grid = Grid::make(ell, T, nx, nt);
  pd.u0 = parse_expr(u0);
  pd.u1 = parse_expr(u1);
  pd.phi = parse_expr(phi);
  pd.validate();
  return pd;
}

}  // namespace

PYBIND11_MODULE(_memkernel, m) {
  m.doc() = "Memory kernel wave problems: direct solver, kernel reconstruction, checks";

  py::register_exception<Error>(m, "MemkernelError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NoConvergence>(m, "NoConvergence", PyExc_RuntimeError);

  py::class_<Expr>(m, "Expr")
      .def(py::init([](const std::string& text, const std::string& var) { return parse_expr(text, var); }),
           py::arg("text"), py::arg("var") = "x")
      .def("__call__", &Expr::eval)
      .def("derivative", py::overload_cast<int>(&Expr::derivative, py::const_), py::arg("order") = 1)
      .def("__str__", &Expr::str)
      .def("__repr__", [](const Expr& e) { return "Expr('" + e.str() + "', '" + e.var() + "')"; });

  py::class_<Grid>(m, "Grid")
      .def_readonly("ell", &Grid::ell)
      .def_readonly("T", &Grid::T)
      .def_readonly("nx", &Grid::nx)
      .def_readonly("nt", &Grid::nt)
      .def_property_readonly("dx", &Grid::dx)
      .def_property_readonly("dt", &Grid::dt)
      .def_property_readonly("x", [](const Grid& g) { return to_array(g.x_nodes()); })
      .def_property_readonly("t", [](const Grid& g) { return to_array(g.t_nodes()); });

  py::class_<ProblemData>(m, "Problem")
      .def(py::init(&make_problem), py::kw_only(), py::arg("beta") = 0.1, py::arg("p") = 1.0, py::arg("q") = 1.0,
           py::arg("ell") = 1.0, py::arg("T") = 1.0, py::arg("nx") = 200, py::arg("nt") = 400,
           py::arg("u0") = "sin(1.5707963267948966*x)", py::arg("u1") = "0.5*x + 0.8*x^3",
           py::arg("phi") = "x^3*(1 - x)^3")
      .def_readonly("beta", &ProblemData::beta)
      .def_readonly("p", &ProblemData::p)
      .def_readonly("q", &ProblemData::q)
      .def_readonly("grid", &ProblemData::grid);

  m.def(
      "solve_direct",
      [](const ProblemData& pd, const std::string& k) {
        const DirectSolution s = solve_direct(pd, Kernel::from_expr(parse_expr(k, "t"), pd.grid));
        py::dict d;
        d["u"] = to_array(s.u);
        d["y"] = to_array(s.y.values);
        d["yprime"] = to_array(s.yprime.values);
        d["f"] = to_array(s.f.values);
        return d;
      },
      py::arg("problem"), py::arg("k"), "Direct solution for the kernel k(t); dict of arrays u, y, yprime, f.");

  m.def(
      "synthesize_f",
      [](const ProblemData& pd, const std::string& k, bool richardson) {
        return to_array(
            synthesize_f(pd, parse_expr(k, "t"), richardson ? SynthRefine::Richardson : SynthRefine::None).values);
      },
      py::arg("problem"), py::arg("k"), py::arg("richardson") = true);

  m.def(
      "add_noise",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> f, double sigma, std::uint64_t seed) {
        return to_array(add_noise(to_series(f, 1.0), sigma, seed).values);
      },
      py::arg("f"), py::arg("sigma"), py::arg("seed") = 1);

  m.def(
      "check_compatibility",
      [](const ProblemData& pd, py::array_t<double, py::array::c_style | py::array::forcecast> f,
         std::optional<double> declared_k0) {
        SetupOptions so;
        so.strict = false;
        const EquivSetup s = build_setup(pd, to_series(f, pd.grid.dt()), so);
        py::dict d;
        for (const auto& l : check_compatibility(pd, s, declared_k0).lines)
          d[py::str(l.name)] = py::make_tuple(l.value, l.tolerance, l.pass);
        return d;
      },
      py::arg("problem"), py::arg("f"), py::arg("declared_k0") = py::none(),
      "Compatibility lines as name -> (value, tolerance, pass).");

  m.def(
      "reconstruct",
      [](const ProblemData& pd, py::array_t<double, py::array::c_style | py::array::forcecast> f, double tol,
         int max_iter, int window_steps, int max_halvings, const std::string& sign, int smoothing) {
        SetupOptions so;
        so.smoothing_window = smoothing;
        const EquivSetup s = build_setup(pd, to_series(f, pd.grid.dt()), so);
        InverseOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.window_steps = window_steps;
        o.max_halvings = max_halvings;
        if (sign == "eq41")
          o.sign = SignVariant::Eq41;
        else if (sign != "eq35")
          throw ConfigError("sign must be eq35 or eq41");
        Reconstruction r;
        {
          py::gil_scoped_release nogil;
          r = reconstruct(s, o);
        }
        py::dict d;
        d["k"] = to_array(r.kernel.k.values);
        d["kprime"] = to_array(r.kernel.kprime.values);
        d["y"] = to_array(r.y.values);
        d["v"] = to_array(r.v);
        d["windows"] = r.windows.size();
        d["halvings"] = r.halvings;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("problem"), py::arg("f"), py::kw_only(), py::arg("tol") = 1e-10, py::arg("max_iter") = 50,
      py::arg("window_steps") = 0, py::arg("max_halvings") = 6, py::arg("sign") = "eq35",
      py::arg("smoothing") = 0, "Reconstruct the kernel from sampled f on the problem grid.");

  m.attr("ESTIMATE_CONSTANT") = kEstimateConstant;

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text, const std::string& out, bool twin,
         bool force) -> py::tuple {
        RunConfig cfg;
        try {
          cfg = parse_config(config_text, "<string>");
        } catch (const std::exception& e) {
          return py::make_tuple(static_cast<int>(exit_code_for(e)), std::string(), std::string("error: ") + e.what() + "\n");
        }
        CommandFlags flags;
        if (!out.empty()) flags.out = out;
        flags.twin = twin;
        flags.force = force;
        std::ostringstream o, e;
        const int code = run_command(command, cfg, flags, o, e);
        return py::make_tuple(static_cast<int>(code), o.str(), e.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = "", py::arg("twin") = false, py::arg("force") = false,
      "Run a CLI command on config text; returns (exit_code, stdout, stderr).");
}
